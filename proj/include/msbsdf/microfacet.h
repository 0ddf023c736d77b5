// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "msbsdf/geometry.h"
#include "msbsdf/random.h"

namespace msbsdf {

enum class NdfFamily { Beckmann, GGX };

/// Microfacet normal distribution with anisotropic roughness aligned to the
/// local x/y axes. Roughness below kMinAlpha is clamped up to it; negative,
/// non-finite or > kMaxAlpha values are rejected.
class RoughnessProfile {
public:
    static constexpr double kMinAlpha = 1e-4;
    static constexpr double kMaxAlpha = 4.0;

    RoughnessProfile(NdfFamily family, double alpha_x, double alpha_y);
    static RoughnessProfile isotropic(NdfFamily family, double alpha) {
        return {family, alpha, alpha};
    }

    NdfFamily family() const { return family_; }
    double alpha_x() const { return alpha_x_; }
    double alpha_y() const { return alpha_y_; }
    bool is_isotropic() const { return alpha_x_ == alpha_y_; }

private:
    NdfFamily family_;
    double alpha_x_, alpha_y_;
};

/// |cos theta| floor used in the Smith function and in pdf denominators.
inline constexpr double kGrazingCos = 1e-7;

/// D(m) in sr^-1; zero for m on or below the macro horizon.
double ndf_d(const Direction& m, const RoughnessProfile& p);

/// Smith Lambda on the full sphere; satisfies Lambda(-w) = -1 - Lambda(w).
double smith_lambda(const Direction& w, const RoughnessProfile& p);

/// Heaviside chi+(w.m).
double g1_local(const Direction& w, const Direction& m);

/// |1 / (1 + Lambda(w))|. Equal to the usual Smith G1 for upward w; for
/// downward w it is 1 / Lambda(-w), the normaliser of the visible-normal
/// density seen from below, and is not bounded by one.
double g1_dist(const Direction& w, const RoughnessProfile& p);

/// Full-spherical masking G1(w, m) = chi+(w.m) * g1_dist(w).
double g1(const Direction& w, const Direction& m, const RoughnessProfile& p);

struct MicronormalSample {
    Direction m;
    double density = 0;  ///< pdf_vndf(w, m), per solid angle of m
};

/// Draws m with density proportional to chi+(w.m) (w.m) D(m). GGX uses the
/// spherical-cap construction in the stretched configuration, Beckmann uses
/// numerical inversion of the visible-slope CDF. A zero density signals a
/// direction with no visible microsurface (w straight down).
MicronormalSample sample_vndf(const Direction& w, const RoughnessProfile& p, RandomStream& rs);

/// g1_dist(w) chi+(w.m) (w.m) D(m) / |w.z|.
double pdf_vndf(const Direction& w, const Direction& m, const RoughnessProfile& p);

}  // namespace msbsdf
