// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/microfacet.h"

#include <algorithm>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace msbsdf {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
// Floor on Lambda(-w) for downward w; below it nothing is visible.
constexpr double kMinVisibleArea = 1e-300;

double check_alpha(double a) {
    if (!std::isfinite(a) || a < 0 || a > RoughnessProfile::kMaxAlpha)
        throw std::invalid_argument("roughness must lie in [0, 4]");
    return std::max(a, RoughnessProfile::kMinAlpha);
}

// alpha_x^2 x^2 + alpha_y^2 y^2: squared projected roughness times sin^2.
double projected_slope2(const Direction& w, const RoughnessProfile& p) {
    const double ax = p.alpha_x() * w.x, ay = p.alpha_y() * w.y;
    return ax * ax + ay * ay;
}

// Lambda for an upward direction with the given |cos theta|. Written so that
// it never cancels: both families return a small positive number near the
// normal.
double lambda_upper(double s2, double z, NdfFamily family) {
    z = std::max(z, kGrazingCos);
    if (s2 <= 0)
        return 0;
    if (family == NdfFamily::GGX) {
        const double t = s2 / (z * z);
        return t / (2.0 * (std::sqrt(1.0 + t) + 1.0));
    }
    const double a = z / std::sqrt(s2);
    if (a > 26.0)
        return 0;
    return -0.5 * std::erfc(a) + std::exp(-a * a) / (2.0 * a * kSqrtPi);
}

}  // namespace

RoughnessProfile::RoughnessProfile(NdfFamily family, double alpha_x, double alpha_y)
    : family_(family), alpha_x_(check_alpha(alpha_x)), alpha_y_(check_alpha(alpha_y)) {}

double ndf_d(const Direction& m, const RoughnessProfile& p) {
    if (m.z <= 0)
        return 0;
    const double ax = p.alpha_x(), ay = p.alpha_y();
    const double ex = m.x / ax, ey = m.y / ay;
    const double z2 = m.z * m.z;
    if (p.family() == NdfFamily::GGX) {
        const double d = ex * ex + ey * ey + z2;
        return 1.0 / (kPi * ax * ay * d * d);
    }
    const double tan2 = (ex * ex + ey * ey) / z2;
    return std::exp(-tan2) / (kPi * ax * ay * z2 * z2);
}

double smith_lambda(const Direction& w, const RoughnessProfile& p) {
    const double s2 = projected_slope2(w, p);
    if (w.z > 0)
        return lambda_upper(s2, w.z, p.family());
    return -1.0 - lambda_upper(s2, -w.z, p.family());
}

double g1_local(const Direction& w, const Direction& m) {
    return dot(w, m) > 0 ? 1.0 : 0.0;
}

double g1_dist(const Direction& w, const RoughnessProfile& p) {
    const double s2 = projected_slope2(w, p);
    if (w.z > 0)
        return 1.0 / (1.0 + lambda_upper(s2, w.z, p.family()));
    // -1 / (1 + Lambda(w)) = 1 / Lambda(-w).
    return 1.0 / std::max(lambda_upper(s2, -w.z, p.family()), kMinVisibleArea);
}

double g1(const Direction& w, const Direction& m, const RoughnessProfile& p) {
    if (g1_local(w, m) == 0)
        return 0;
    return g1_dist(w, p);
}

double pdf_vndf(const Direction& w, const Direction& m, const RoughnessProfile& p) {
    const double wm = dot(w, m);
    if (wm <= 0)
        return 0;
    const double d = ndf_d(m, p);
    if (d == 0)
        return 0;
    return g1_dist(w, p) * wm * d / std::max(std::abs(w.z), kGrazingCos);
}

namespace {

Direction sample_ggx(const Direction& w, const RoughnessProfile& p, double u1, double u2) {
    const Direction ws = normalize({p.alpha_x() * w.x, p.alpha_y() * w.y, w.z});
    const double phi = 2.0 * kPi * u1;
    const double z = (1.0 - u2) * (1.0 + ws.z) - ws.z;
    const double sin_theta = std::sqrt(std::clamp(1.0 - z * z, 0.0, 1.0));
    const Vec3 h = Vec3{sin_theta * std::cos(phi), sin_theta * std::sin(phi), z} + ws;
    return normalize({p.alpha_x() * h.x, p.alpha_y() * h.y, h.z});
}

// Unnormalised CDF of the first visible slope for a stretched direction at
// (cos_t, sin_t), valid for x <= cot.
double slope_cdf(double x, double cos_t, double sin_t) {
    return 0.5 * cos_t * std::erfc(-x) + sin_t * std::exp(-x * x) / (2.0 * kSqrtPi);
}

double sample_slope_x(double u, double cos_t, double sin_t) {
    const double hi0 = cos_t / sin_t;
    const double total = slope_cdf(hi0, cos_t, sin_t);
    const double target = u * total;
    double hi = hi0;
    const double floor = std::min(hi, 0.0) - 40.0;
    double step = 1.0, lo = std::min(hi, 0.0) - step;
    while (lo > floor && slope_cdf(lo, cos_t, sin_t) > target) {
        step *= 2.0;
        lo = std::min(hi, 0.0) - step;
    }
    lo = std::max(lo, floor);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = slope_cdf(x, cos_t, sin_t) - target;
        if (g > 0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(x)))
            break;
        const double dg = (cos_t - x * sin_t) * std::exp(-x * x) / kSqrtPi;
        double next = dg > 0 ? x - g / dg : lo - 1.0;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

Direction sample_beckmann(const Direction& w, const RoughnessProfile& p, double u1, double u2) {
    const Direction ws = normalize({p.alpha_x() * w.x, p.alpha_y() * w.y, w.z});
    const double sin_t = std::sqrt(ws.x * ws.x + ws.y * ws.y);
    const double cos_t = ws.z;
    const double v = std::clamp(2.0 * u2 - 1.0, -1.0 + 1e-16, 1.0 - 1e-16);
    const double y = boost::math::erf_inv(v);
    double sx, sy;
    if (sin_t < 1e-10) {
        const double x = boost::math::erf_inv(std::clamp(2.0 * u1 - 1.0, -1.0 + 1e-16, 1.0 - 1e-16));
        sx = x;
        sy = y;
    } else {
        const double x = sample_slope_x(u1, cos_t, sin_t);
        const double cos_phi = ws.x / sin_t, sin_phi = ws.y / sin_t;
        sx = cos_phi * x - sin_phi * y;
        sy = sin_phi * x + cos_phi * y;
    }
    return normalize({-p.alpha_x() * sx, -p.alpha_y() * sy, 1.0});
}

}  // namespace

MicronormalSample sample_vndf(const Direction& w, const RoughnessProfile& p, RandomStream& rs) {
    const double u1 = rs.uniform(), u2 = rs.uniform();
    // Nothing of the upper-facing microsurface is visible from straight below.
    const double s2 = projected_slope2(w, p);
    if (w.z < 0 && lambda_upper(s2, -w.z, p.family()) <= kMinVisibleArea)
        return {kNormal, 0};
    const Direction m = p.family() == NdfFamily::GGX ? sample_ggx(w, p, u1, u2)
                                                     : sample_beckmann(w, p, u1, u2);
    if (!std::isfinite(m.x) || !std::isfinite(m.y) || !std::isfinite(m.z))
        return {kNormal, 0};
    return {m, pdf_vndf(w, m, p)};
}

}  // namespace msbsdf
