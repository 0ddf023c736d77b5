// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "msbsdf/rgb.h"

namespace msbsdf {

/// Complex refractive index eta + i kappa per RGB channel.
struct ConductorIor {
    Rgb eta;
    Rgb kappa;
};

/// Relative index of refraction (interior over exterior).
struct DielectricIor {
    double eta = 1.5;
};

/// Copper, sampled at roughly 650/550/450 nm.
inline constexpr ConductorIor kCopper{{0.2004, 0.9240, 1.1022}, {3.9129, 2.4528, 2.1421}};

/// Unpolarised conductor reflectance. `cos_theta` is taken against the
/// microfacet normal and clamped to [0, 1].
Rgb fresnel_conductor(double cos_theta, const ConductorIor& ior);

/// Unpolarised dielectric reflectance. A negative cosine means the light
/// arrives from the interior side, so the relative index is inverted.
/// Returns 1 under total internal reflection.
double fresnel_dielectric(double cos_theta_signed, const DielectricIor& ior);

}  // namespace msbsdf
