// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <variant>

#include "msbsdf/fresnel.h"
#include "msbsdf/microfacet.h"

namespace msbsdf {

/// Rough interface: a roughness profile plus either a conductor or a
/// dielectric index of refraction.
struct MaterialSpec {
    RoughnessProfile roughness;
    std::variant<ConductorIor, DielectricIor> ior;
    /// Forces the conductor Fresnel factor to 1 (furnace configuration).
    bool unit_fresnel = false;

    static MaterialSpec conductor(const RoughnessProfile& r, const ConductorIor& ior) {
        return {r, ior, false};
    }
    /// Lossless conductor, F = 1.
    static MaterialSpec furnace_conductor(const RoughnessProfile& r) {
        return {r, ConductorIor{Rgb(1.0), Rgb(1.0)}, true};
    }
    static MaterialSpec dielectric(const RoughnessProfile& r, double eta) {
        return {r, DielectricIor{eta}, false};
    }

    bool is_dielectric() const { return std::holds_alternative<DielectricIor>(ior); }
    const ConductorIor& conductor_ior() const { return std::get<ConductorIor>(ior); }
    const DielectricIor& dielectric_ior() const { return std::get<DielectricIor>(ior); }
};

}  // namespace msbsdf
