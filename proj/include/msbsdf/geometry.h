// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace msbsdf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;

struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3& v) { return v / length(v); }

/// Unit vectors on the full sphere. Directions may point into either
/// hemisphere; nothing below relies on z >= 0.
using Direction = Vec3;

/// Geometric normal of the local shading space.
inline constexpr Direction kNormal{0, 0, 1};

inline Direction spherical_direction(double theta, double phi) {
    const double s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

inline double cos_theta(const Direction& w) { return w.z; }

/// Orthonormal right-handed basis (s, t, n). Local shading space has the
/// geometric normal at +z and the anisotropy axes along +x (s) and +y (t).
struct Frame {
    Vec3 s{1, 0, 0}, t{0, 1, 0}, n{0, 0, 1};

    /// Builds a frame around `normal`; `tangent` fixes the anisotropy axis
    /// and is orthogonalised against the normal.
    static Frame from_normal_tangent(const Vec3& normal, const Vec3& tangent);
    /// Builds a frame with an arbitrary (but deterministic) tangent.
    static Frame from_normal(const Vec3& normal);

    Vec3 to_local(const Vec3& v) const { return {dot(v, s), dot(v, t), dot(v, n)}; }
    Vec3 to_world(const Vec3& v) const { return s * v.x + t * v.y + n * v.z; }
};

/// Normalised bisector of `a` and `b`; empty when a = -b.
std::optional<Direction> half_vector(const Direction& a, const Direction& b);

/// Specular bounce of the propagation direction `d` about the micronormal
/// `m` (both in flow convention): returns d - 2 (d.m) m.
Direction reflect(const Direction& d, const Direction& m);

/// Snell refraction of the propagation direction `d` through a facet with
/// normal `m`. `eta_ratio` is eta(far side) / eta(near side); the side `d`
/// arrives from is chosen from the sign of d.m. Empty on total internal
/// reflection.
std::optional<Direction> refract(const Direction& d, const Direction& m, double eta_ratio);

}  // namespace msbsdf
