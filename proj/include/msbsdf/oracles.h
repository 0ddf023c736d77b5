// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msbsdf/estimators.h"
#include "msbsdf/geometry.h"
#include "msbsdf/material.h"
#include "msbsdf/microfacet.h"
#include "msbsdf/random.h"

// Brute-force references used by the test suites and the CLI reports. None
// of these call the closed form or estimator they are meant to check.
namespace msbsdf::oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
/// Legendre recurrence).
struct GaussLegendre {
    std::vector<double> nodes, weights;
};
GaussLegendre gauss_legendre(int n);

enum class QuadratureRule { GaussLegendre, Midpoint };
enum class QuadratureDomain { UpperHemisphere, FullSphere };

struct QuadratureNode {
    Direction dir;
    double weight;  ///< solid angle
};

/// Product rule in (cos theta, phi). Each hemisphere gets its own
/// n_theta-point rule in cos theta so the horizon is a panel boundary.
struct QuadratureGrid {
    int n_theta = 64;
    int n_phi = 128;
    QuadratureRule rule = QuadratureRule::GaussLegendre;
    QuadratureDomain domain = QuadratureDomain::FullSphere;

    std::vector<QuadratureNode> nodes() const;
};

/// Smith Lambda from the projected area of the visible microsurface,
/// Lambda = (1 / cos) * integral <w.m> D(m) dm - 1, integrated in slope
/// space using only ndf_d. Valid on the full sphere.
double lambda_numeric(const Direction& w, const RoughnessProfile& p, int nodes = 2048);

/// Length-2 value plus a sphere quadrature over the single interior
/// direction of length-3 paths (all branch combinations).
Rgb rho2_quadrature(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat,
                    const EvalConventions& conv, const QuadratureGrid& grid);

struct FurnaceResult {
    double eval_albedo = 0;      ///< stratified integral of eval * |cos|
    double eval_stderr = 0;
    double sampler_albedo = 0;   ///< mean sampler weight, failures count as 0
    double sampler_failure_rate = 0;
    double reflected = 0;        ///< eval-based, omega_o on the incident side
    double transmitted = 0;
    Diagnostics diagnostics;
    double gap() const { return eval_albedo - sampler_albedo; }
};

enum class Estimator { PT, BDPT };

/// Directional albedo (channel mean) for omega_i by `n` stratified
/// evaluations and `n_sampler` sampler walks. Work is split into fixed
/// chunks with their own child streams, so the result does not depend on
/// the thread count.
FurnaceResult furnace_albedo(const Direction& omega_i, const MaterialSpec& mat, const EvalConventions& conv,
                             long n, const RandomStream& rs, Estimator est = Estimator::PT,
                             long n_sampler = 0, int threads = 1);

struct ReciprocityRow {
    Direction omega_i, omega_o;
    double forward = 0, forward_se = 0;
    double backward = 0, backward_se = 0;
    double z_score = 0;
    bool violation = false;
};

struct ReciprocityReport {
    std::vector<ReciprocityRow> rows;
    int violations = 0;
    double max_abs_z = 0;
};

/// For every pair of grid directions, independent estimates of
/// rho(a, b) and rho(b, a) (channel mean) with standard errors; pairs
/// differing by more than 3 pooled standard errors are flagged.
ReciprocityReport reciprocity_sweep(const MaterialSpec& mat, const EvalConventions& conv,
                                    const std::vector<Direction>& dirs_i, const std::vector<Direction>& dirs_o,
                                    long n, const RandomStream& rs, Estimator est = Estimator::PT,
                                    int threads = 1);

struct ChiSquareResult {
    double statistic = 0;
    int dof = 0;
    double p_value = 0;
    int pooled_bins = 0;
};

/// Pearson test of observed counts against expected counts (same total).
/// Bins with expected count below `min_expected` are pooled in order; throws
/// std::invalid_argument if fewer than two bins remain.
ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected,
                           double min_expected = 5.0);

/// Same test when the expected counts are themselves estimates with the
/// given variances; each bin contributes (o - e)^2 / (e + var e).
ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected,
                           const std::vector<double>& expected_variance, double min_expected = 5.0);

struct VndfCheck {
    ChiSquareResult chi;
    double normalization = 0;  ///< quadrature of pdf_vndf over the bins
    long invisible = 0;        ///< samples with w.m <= 0
    double max_density_error = 0;  ///< max relative |density - pdf_vndf|
};

/// Bins `n` micronormals from sample_vndf on an (n_theta x n_phi) grid,
/// uniform in cos theta_m and phi, and tests them against the expected
/// counts obtained by integrating pdf_vndf over each bin.
VndfCheck vndf_chi_square(const Direction& w, const RoughnessProfile& p, long n, const RandomStream& rs,
                          int n_theta = 32, int n_phi = 64);

struct SamplerCheck {
    ChiSquareResult chi;
    long walks = 0;
    long failed = 0;
};

/// Bins the exit directions of `n_walks` sample() walks from omega_i (uniform
/// in cos theta and phi, per hemisphere the material can scatter into) and
/// compares them with n_walks times the integral of eval_pt * |cos theta_o|
/// over each bin, estimated from `evals_per_bin` uniformly placed
/// evaluations. Meaningful when sample() weights are identically 1 (unit
/// Fresnel conductors and dielectrics in the consistent mode).
SamplerCheck sampler_chi_square(const Direction& omega_i, const MaterialSpec& mat, const EvalConventions& conv,
                                long n_walks, long evals_per_bin, const RandomStream& rs, int n_theta = 16,
                                int n_phi = 32, int threads = 1);

/// Mean and standard error of `n` calls of `fn`, run in fixed-size chunks
/// with child streams of `rs`.
struct MeanEstimate {
    double mean = 0, standard_error = 0;
};
MeanEstimate chunked_mean(long n, const RandomStream& rs, int threads,
                          const std::function<double(RandomStream&)>& fn);

}  // namespace msbsdf::oracle
