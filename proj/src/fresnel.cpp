// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/fresnel.h"

#include <algorithm>
#include <complex>

namespace msbsdf {

namespace {

double fresnel_complex(double cos_i, std::complex<double> eta) {
    using C = std::complex<double>;
    cos_i = std::clamp(cos_i, 0.0, 1.0);
    const double sin2_i = 1.0 - cos_i * cos_i;
    const C sin2_t = sin2_i / (eta * eta);
    const C cos_t = std::sqrt(C(1.0) - sin2_t);
    const C r_parl = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    const C r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    return 0.5 * (std::norm(r_parl) + std::norm(r_perp));
}

}  // namespace

Rgb fresnel_conductor(double cos_theta, const ConductorIor& ior) {
    Rgb out;
    for (int c = 0; c < 3; ++c)
        out[c] = std::clamp(fresnel_complex(cos_theta, {ior.eta[c], ior.kappa[c]}), 0.0, 1.0);
    return out;
}

double fresnel_dielectric(double cos_theta_signed, const DielectricIor& ior) {
    double eta = ior.eta;
    if (eta == 1.0)
        return 0.0;
    double cos_i = std::clamp(cos_theta_signed, -1.0, 1.0);
    if (cos_i < 0) {
        eta = 1.0 / eta;
        cos_i = -cos_i;
    }
    const double sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
    if (sin2_t >= 1.0)
        return 1.0;
    const double cos_t = std::sqrt(1.0 - sin2_t);
    const double r_parl = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    const double r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    return std::clamp(0.5 * (r_parl * r_parl + r_perp * r_perp), 0.0, 1.0);
}

}  // namespace msbsdf
