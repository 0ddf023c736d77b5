// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msbsdf/material.h"
#include "msbsdf/path.h"
#include "msbsdf/random.h"
#include "msbsdf/rgb.h"

namespace msbsdf {

/// Counters for walks that ended without a result and for per-bounce terms
/// that were discarded as non-finite.
struct Diagnostics {
    uint64_t walks = 0;
    uint64_t failed_walks = 0;
    uint64_t dropped_nonfinite = 0;

    Diagnostics& operator+=(const Diagnostics& o) {
        walks += o.walks;
        failed_walks += o.failed_walks;
        dropped_nonfinite += o.dropped_nonfinite;
        return *this;
    }
};

/// omega_i and omega_o point away from the surface and may lie in either
/// hemisphere.
struct BsdfQuery {
    Direction omega_i;
    Direction omega_o;
    MaterialSpec mat;
    EvalConventions conv{};
    int n_samples = 1;
};

/// Unidirectional estimate of rho(omega_i, omega_o): one VNDF walk from
/// -omega_i per sample, connecting to omega_o at every vertex. When
/// `per_bounce` is given it is resized to max_bounces + 1 and entry k
/// receives the (averaged) contribution of paths with k vertices.
Rgb eval_pt(const BsdfQuery& q, RandomStream& rs, Diagnostics* diag = nullptr,
            std::vector<Rgb>* per_bounce = nullptr);

/// One (camera length, light length) split of a bidirectional sample.
struct BdptStrategy {
    int camera_dirs = 0;
    int light_dirs = 0;
    LightPath path;
    Rgb f;
    double pdf = 0;      ///< density of this strategy for the path
    double pdf_sum = 0;  ///< sum over all strategies that can build it
};

/// Bidirectional estimate: walks from -omega_i and from -omega_o, all
/// splits combined with the balance heuristic. `trace` receives every
/// evaluated strategy of the last sample (testing aid).
Rgb eval_bdpt(const BsdfQuery& q, RandomStream& rs, Diagnostics* diag = nullptr,
              std::vector<BdptStrategy>* trace = nullptr);

enum class Lobe : unsigned char { Reflected, Transmitted };

struct SampleRecord {
    Direction omega_o;
    /// rho |cos omega_o| / pdf for the walk that produced omega_o.
    Rgb weight;
    int bounce_count = 0;
    Lobe lobe = Lobe::Reflected;
    /// Set when the walk crossed an index-matched interface.
    bool delta = false;
};

/// Random walk from -omega_i that exits with probability G1 whenever the
/// current direction points away from the surface. Empty when max_bounces
/// is reached first. `path_out` receives the generated path.
std::optional<SampleRecord> sample(const Direction& omega_i, const MaterialSpec& mat,
                                   const EvalConventions& conv, RandomStream& rs,
                                   Diagnostics* diag = nullptr, LightPath* path_out = nullptr);

/// Closed-form single-scattering microfacet BSDF (separable Smith masking).
Rgb eval_single_bounce(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat);

/// Density of a single VNDF bounce from omega_i, summed over branches.
double pdf_single(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat);

/// Mixture of pdf_single and a normalised cosine density, used as the
/// sampling pdf of sample() inside MIS weights.
double pdf_proxy(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat,
                 double single_weight = 0.5);

}  // namespace msbsdf
