// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/geometry.h"

#include <algorithm>

namespace msbsdf {

Frame Frame::from_normal_tangent(const Vec3& normal, const Vec3& tangent) {
    Frame f;
    f.n = normalize(normal);
    Vec3 s = tangent - f.n * dot(tangent, f.n);
    if (dot(s, s) < 1e-20)
        return from_normal(normal);
    f.s = normalize(s);
    f.t = cross(f.n, f.s);
    return f;
}

Frame Frame::from_normal(const Vec3& normal) {
    // Duff et al., "Building an orthonormal basis, revisited".
    Frame f;
    f.n = normalize(normal);
    const double sign = std::copysign(1.0, f.n.z);
    const double a = -1.0 / (sign + f.n.z);
    const double b = f.n.x * f.n.y * a;
    f.s = {1.0 + sign * f.n.x * f.n.x * a, sign * b, -sign * f.n.x};
    f.t = {b, sign + f.n.y * f.n.y * a, -f.n.y};
    return f;
}

std::optional<Direction> half_vector(const Direction& a, const Direction& b) {
    const Vec3 h = a + b;
    const double len2 = dot(h, h);
    if (len2 < 1e-24)
        return std::nullopt;
    return h / std::sqrt(len2);
}

Direction reflect(const Direction& d, const Direction& m) {
    return normalize(d - m * (2.0 * dot(d, m)));
}

std::optional<Direction> refract(const Direction& d, const Direction& m, double eta_ratio) {
    Vec3 n = m;
    double cos_i = -dot(d, n);
    if (cos_i < 0) {
        n = -n;
        cos_i = -cos_i;
    }
    const double sin2_t = std::max(0.0, 1.0 - cos_i * cos_i) / (eta_ratio * eta_ratio);
    if (sin2_t >= 1.0)
        return std::nullopt;
    const double cos_t = std::sqrt(1.0 - sin2_t);
    return normalize(d / eta_ratio + n * (cos_i / eta_ratio - cos_t));
}

}  // namespace msbsdf
