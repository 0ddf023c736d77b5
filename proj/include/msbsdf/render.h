// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "msbsdf/image.h"
#include "msbsdf/material.h"
#include "msbsdf/oracles.h"
#include "msbsdf/path.h"

namespace msbsdf {

enum class Geometry { Sphere, Slab };

struct DirectionalLight {
    Vec3 to_light{0, 0, 1};  ///< unit vector pointing at the light
    Rgb irradiance{1.0};
};
struct PointLight {
    Vec3 position;
    Rgb intensity{1.0};
};
struct EnvLight {
    Rgb radiance{1.0};
};

struct Light {
    enum class Kind { Directional, Point, Env } kind = Kind::Env;
    DirectionalLight directional;
    PointLight point;
    EnvLight env;
};

/// Scalar roughness over the surface UVs in [0, 1)^2, nearest lookup. Row 0
/// is v = 0.
struct RoughnessGrid {
    int width = 0, height = 0;
    std::vector<double> values;

    double lookup(double u, double v) const;
};

struct Camera {
    Vec3 position{0, -4, 0};
    Vec3 look_at{0, 0, 0};
    Vec3 up{0, 0, 1};
    double fov_deg = 40;
    int width = 64, height = 64;
};

struct SceneSpec {
    Geometry geometry = Geometry::Sphere;
    double slab_half_size = 1.0;  ///< slab covers |x|, |y| <= half size at z = 0
    MaterialSpec material = MaterialSpec::furnace_conductor(RoughnessProfile::isotropic(NdfFamily::GGX, 0.5));
    std::optional<RoughnessGrid> roughness_grid;
    std::vector<Light> lights;
    Camera camera;

    /// Throws std::invalid_argument when there is no light or the
    /// resolution is below 16x16.
    void validate() const;
};

/// Plain `key = value` lines, `#` comments. Unknown keys and malformed
/// values throw std::invalid_argument with the line number. Relative
/// roughness grid paths resolve against `base_dir`.
SceneSpec parse_scene(std::istream& in, const std::string& base_dir = ".");
SceneSpec load_scene(const std::string& path);

enum class EstimatorKind { PT, BDPT };

struct RunConfig {
    int spp = 4;
    int max_bounces = 10;
    EstimatorKind estimator = EstimatorKind::BDPT;
    VertexMode mode = VertexMode::CancellationConsistent;
    uint64_t seed = 1;
    int threads = 0;  ///< 0: MSBSDF_THREADS or the hardware count

    void validate() const;
};

/// Direct lighting with the multiple-scattering BSDF. Delta lights are
/// evaluated with the chosen estimator. The environment combines one
/// cosine-distributed light sample (stratified over the pixel) with four
/// sample() walks via the balance heuristic, using pdf_proxy as the BSDF
/// density. Every pixel owns a stream derived from the seed and its index,
/// so the image is independent of the thread count.
ImageBuffer render(const SceneSpec& scene, const RunConfig& cfg, Diagnostics* diag = nullptr);

/// Per-node record of lobe_tabulate (channel means).
struct LobeRow {
    double theta_deg = 0, phi_deg = 0;
    double weight = 0;  ///< solid angle of the quadrature node
    double rho1 = 0, rho2 = 0, rho3plus = 0, total = 0;
};

struct LobeTable {
    std::vector<LobeRow> rows;
    double reflected = 0, transmitted = 0;
};

/// rho(omega_i, .) on a sphere quadrature grid split by the number of
/// vertices, plus the reflected and transmitted energies (integrals of
/// total * |cos theta_o|).
LobeTable lobe_tabulate(const Direction& omega_i, const MaterialSpec& mat, const RunConfig& cfg,
                        const oracle::QuadratureGrid& grid, int samples_per_node);

/// Column order: theta_o_deg,phi_o_deg,weight,rho_1,rho_2,rho_3plus,rho_total
std::string lobe_csv(const LobeTable& table);

}  // namespace msbsdf
