// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

namespace msbsdf {

/// Three-channel real value (Fresnel factors, BSDF values, radiance).
struct Rgb {
    double r = 0, g = 0, b = 0;

    constexpr Rgb() = default;
    constexpr explicit Rgb(double v) : r(v), g(v), b(v) {}
    constexpr Rgb(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}

    constexpr double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    constexpr double& operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }

    constexpr Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
    constexpr Rgb operator-(const Rgb& o) const { return {r - o.r, g - o.g, b - o.b}; }
    constexpr Rgb operator*(const Rgb& o) const { return {r * o.r, g * o.g, b * o.b}; }
    constexpr Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
    constexpr Rgb operator/(double s) const { return {r / s, g / s, b / s}; }
    constexpr Rgb& operator+=(const Rgb& o) {
        r += o.r; g += o.g; b += o.b;
        return *this;
    }
    constexpr Rgb& operator*=(const Rgb& o) {
        r *= o.r; g *= o.g; b *= o.b;
        return *this;
    }
    constexpr Rgb& operator*=(double s) {
        r *= s; g *= s; b *= s;
        return *this;
    }
    constexpr bool operator==(const Rgb&) const = default;

    constexpr double average() const { return (r + g + b) / 3.0; }
    constexpr double max_component() const { return std::max(r, std::max(g, b)); }
    bool is_finite() const { return std::isfinite(r) && std::isfinite(g) && std::isfinite(b); }
    constexpr bool is_black() const { return r == 0 && g == 0 && b == 0; }
};

inline constexpr Rgb operator*(double s, const Rgb& c) { return c * s; }

}  // namespace msbsdf
