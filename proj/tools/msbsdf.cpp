// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <map>

#include "msbsdf/fresnel.h"
#include "msbsdf/oracles.h"
#include "msbsdf/parallel.h"
#include "msbsdf/render.h"

using namespace msbsdf;

namespace {

struct MaterialArgs {
    std::string kind = "furnace";
    std::string ndf = "ggx";
    double alpha = 0.5;
    double alpha_y = -1;
    double eta = 1.5;

    void add(CLI::App* app) {
        app->add_option("--material", kind, "furnace | conductor | dielectric")
            ->check(CLI::IsMember({"furnace", "conductor", "dielectric"}));
        app->add_option("--ndf", ndf, "ggx | beckmann")->check(CLI::IsMember({"ggx", "beckmann"}));
        app->add_option("--alpha", alpha, "roughness (alpha_x)");
        app->add_option("--alpha-y", alpha_y, "roughness along y (default: --alpha)");
        app->add_option("--eta", eta, "dielectric index of refraction");
    }

    RoughnessProfile roughness() const {
        return RoughnessProfile(ndf == "ggx" ? NdfFamily::GGX : NdfFamily::Beckmann, alpha,
                                alpha_y < 0 ? alpha : alpha_y);
    }

    MaterialSpec material() const {
        if (kind == "dielectric")
            return MaterialSpec::dielectric(roughness(), eta);
        if (kind == "conductor")
            return MaterialSpec::conductor(roughness(), kCopper);
        return MaterialSpec::furnace_conductor(roughness());
    }
};

struct RunArgs {
    int spp = 4;
    int max_bounces = 10;
    std::string estimator = "bdpt";
    std::string mode = "consistent";
    uint64_t seed = 1;
    int threads = 0;

    void add(CLI::App* app) {
        app->add_option("--spp", spp, "samples per pixel")->check(CLI::PositiveNumber);
        app->add_option("--estimator", estimator, "pt | bdpt")->check(CLI::IsMember({"pt", "bdpt"}));
        app->add_option("--vertex-mode", mode, "literal | consistent")
            ->check(CLI::IsMember({"literal", "consistent"}));
        app->add_option("--max-bounces", max_bounces, "maximum number of vertices")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "random seed");
        app->add_option("--threads", threads, "worker threads (default: MSBSDF_THREADS or all cores)");
    }

    RunConfig config() const {
        RunConfig c;
        c.spp = spp;
        c.max_bounces = max_bounces;
        c.estimator = estimator == "pt" ? EstimatorKind::PT : EstimatorKind::BDPT;
        c.mode = vertex_mode();
        c.seed = seed;
        c.threads = threads;
        return c;
    }
    VertexMode vertex_mode() const {
        return mode == "literal" ? VertexMode::Literal : VertexMode::CancellationConsistent;
    }
    oracle::Estimator oracle_estimator() const {
        return estimator == "pt" ? oracle::Estimator::PT : oracle::Estimator::BDPT;
    }
};

Direction from_degrees(double theta, double phi = 0) {
    return spherical_direction(theta * kPi / 180.0, phi * kPi / 180.0);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        fmt::print("{}", text);
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << text;
}

std::string mode_name(VertexMode m) { return m == VertexMode::Literal ? "literal" : "consistent"; }

std::string furnace_header() {
    return "ndf,alpha,material,theta_deg,estimator,vertex_mode,eval_albedo,eval_stderr,sampler_albedo,"
           "sampler_failure_rate,reflected,transmitted\n";
}

std::string furnace_row(const MaterialArgs& m, double theta, const std::string& est, VertexMode mode,
                        const oracle::FurnaceResult& r) {
    return fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.3g},{:.6f},{:.6f}\n", m.ndf, m.alpha, m.kind, theta,
                       est, mode_name(mode), r.eval_albedo, r.eval_stderr, r.sampler_albedo, r.sampler_failure_rate,
                       r.reflected, r.transmitted);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Position-free multiple-scattering microfacet BSDF tools"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "render a scene file to PFM");
    std::string scene_path, out_path;
    RunArgs render_run;
    render_cmd->add_option("--scene", scene_path, "scene file")->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--out", out_path, "output PFM")->required();
    render_run.add(render_cmd);

    // furnace
    auto* furnace_cmd = app.add_subcommand("furnace", "directional albedo (white furnace) table");
    MaterialArgs furnace_mat;
    RunArgs furnace_run;
    std::vector<double> furnace_thetas = {0, 30, 60, 85};
    long furnace_samples = 1000000, furnace_sampler = 100000;
    std::string furnace_out;
    furnace_mat.add(furnace_cmd);
    furnace_run.add(furnace_cmd);
    furnace_cmd->add_option("--theta", furnace_thetas, "incident angles in degrees");
    furnace_cmd->add_option("--samples", furnace_samples, "evaluation samples per angle");
    furnace_cmd->add_option("--sampler-samples", furnace_sampler, "sampler walks per angle");
    furnace_cmd->add_option("--out", furnace_out, "CSV output (default stdout)");

    // lobe
    auto* lobe_cmd = app.add_subcommand("lobe", "tabulate rho(omega_i, .) split by bounce count");
    MaterialArgs lobe_mat;
    RunArgs lobe_run;
    double lobe_theta = 30, lobe_phi = 0;
    int lobe_nt = 32, lobe_np = 64, lobe_samples = 64;
    std::string lobe_out;
    lobe_mat.add(lobe_cmd);
    lobe_run.add(lobe_cmd);
    lobe_cmd->add_option("--theta", lobe_theta, "incident polar angle in degrees");
    lobe_cmd->add_option("--phi", lobe_phi, "incident azimuth in degrees");
    lobe_cmd->add_option("--n-theta", lobe_nt, "polar nodes per hemisphere");
    lobe_cmd->add_option("--n-phi", lobe_np, "azimuthal nodes");
    lobe_cmd->add_option("--samples", lobe_samples, "estimator samples per node");
    lobe_cmd->add_option("--out", lobe_out, "CSV output (default stdout)");

    // vndf-test
    auto* vndf_cmd = app.add_subcommand("vndf-test", "chi-square test of the visible normal sampler");
    MaterialArgs vndf_mat;
    std::vector<double> vndf_thetas = {0, 30, 60, 85};
    long vndf_samples = 1000000;
    uint64_t vndf_seed = 1;
    vndf_mat.add(vndf_cmd);
    vndf_cmd->add_option("--theta", vndf_thetas, "view angles in degrees");
    vndf_cmd->add_option("--samples", vndf_samples, "micronormal samples per angle");
    vndf_cmd->add_option("--seed", vndf_seed, "random seed");

    // reciprocity
    auto* recip_cmd = app.add_subcommand("reciprocity", "swapped-argument sweep on an upper-hemisphere grid");
    MaterialArgs recip_mat;
    RunArgs recip_run;
    int recip_grid = 8;
    long recip_samples = 10000;
    std::string recip_out;
    recip_mat.kind = "conductor";
    recip_mat.add(recip_cmd);
    recip_run.add(recip_cmd);
    recip_cmd->add_option("--grid", recip_grid, "directions per axis (n x n pairs)");
    recip_cmd->add_option("--samples", recip_samples, "estimator runs per direction pair and order");
    recip_cmd->add_option("--out", recip_out, "CSV output (default stdout)");

    // mse
    auto* mse_cmd = app.add_subcommand("mse", "mean squared difference of two PFM images");
    std::string mse_a, mse_b;
    mse_cmd->add_option("a", mse_a, "first PFM")->required()->check(CLI::ExistingFile);
    mse_cmd->add_option("b", mse_b, "second PFM")->required()->check(CLI::ExistingFile);

    // compare-modes
    auto* modes_cmd = app.add_subcommand("compare-modes", "furnace albedo under both vertex-term modes");
    MaterialArgs modes_mat;
    RunArgs modes_run;
    std::vector<double> modes_thetas = {0, 30, 60, 85};
    long modes_samples = 200000;
    modes_mat.add(modes_cmd);
    modes_run.add(modes_cmd);
    modes_cmd->add_option("--theta", modes_thetas, "incident angles in degrees");
    modes_cmd->add_option("--samples", modes_samples, "evaluation samples per angle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*render_cmd) {
            const SceneSpec scene = load_scene(scene_path);
            Diagnostics diag;
            const ImageBuffer img = render(scene, render_run.config(), &diag);
            write_pfm(img, out_path);
            fmt::print(stderr, "wrote {} ({}x{}), walks {}, failed {}, dropped {}\n", out_path, img.width(),
                       img.height(), diag.walks, diag.failed_walks, diag.dropped_nonfinite);
        } else if (*furnace_cmd) {
            const MaterialSpec mat = furnace_mat.material();
            const RunConfig cfg = furnace_run.config();
            std::string csv = furnace_header();
            for (double theta : furnace_thetas) {
                const auto r = oracle::furnace_albedo(from_degrees(theta), mat, {cfg.mode, cfg.max_bounces},
                                                      furnace_samples, RandomStream(cfg.seed),
                                                      furnace_run.oracle_estimator(), furnace_sampler,
                                                      resolve_thread_count(cfg.threads));
                csv += furnace_row(furnace_mat, theta, furnace_run.estimator, cfg.mode, r);
            }
            write_text(furnace_out, csv);
        } else if (*lobe_cmd) {
            const auto table =
                lobe_tabulate(from_degrees(lobe_theta, lobe_phi), lobe_mat.material(), lobe_run.config(),
                              oracle::QuadratureGrid{lobe_nt, lobe_np}, lobe_samples);
            write_text(lobe_out, lobe_csv(table));
            fmt::print(stderr, "E_r {:.6f}  E_t {:.6f}  total {:.6f}\n", table.reflected, table.transmitted,
                       table.reflected + table.transmitted);
        } else if (*vndf_cmd) {
            fmt::print("ndf,alpha,theta_deg,chi2,dof,p_value,normalization,invisible\n");
            for (double theta : vndf_thetas) {
                const auto r = oracle::vndf_chi_square(from_degrees(theta, 30), vndf_mat.roughness(), vndf_samples,
                                                       RandomStream(vndf_seed));
                fmt::print("{},{},{},{:.4f},{},{:.6f},{:.8f},{}\n", vndf_mat.ndf, vndf_mat.alpha, theta,
                           r.chi.statistic, r.chi.dof, r.chi.p_value, r.normalization, r.invisible);
            }
        } else if (*recip_cmd) {
            std::vector<Direction> dirs;
            for (int a = 0; a < recip_grid; ++a)
                dirs.push_back(from_degrees(5.0 + 80.0 * a / std::max(1, recip_grid - 1), 360.0 * a / recip_grid));
            const RunConfig cfg = recip_run.config();
            const auto rep = oracle::reciprocity_sweep(recip_mat.material(), {cfg.mode, cfg.max_bounces}, dirs, dirs,
                                                       recip_samples, RandomStream(cfg.seed),
                                                       recip_run.oracle_estimator(), resolve_thread_count(cfg.threads));
            std::string csv = "theta_i_deg,phi_i_deg,theta_o_deg,phi_o_deg,forward,forward_se,backward,backward_se,"
                              "z_score,violation\n";
            for (const auto& r : rep.rows) {
                auto deg = [](double v) { return v * 180.0 / kPi; };
                csv += fmt::format("{:.3f},{:.3f},{:.3f},{:.3f},{:.8g},{:.3g},{:.8g},{:.3g},{:.3f},{}\n",
                                   deg(std::acos(r.omega_i.z)), deg(std::atan2(r.omega_i.y, r.omega_i.x)),
                                   deg(std::acos(r.omega_o.z)), deg(std::atan2(r.omega_o.y, r.omega_o.x)), r.forward,
                                   r.forward_se, r.backward, r.backward_se, r.z_score, r.violation ? 1 : 0);
            }
            write_text(recip_out, csv);
            fmt::print(stderr, "violations {} of {} ({:.2f}%), max |z| {:.3f}\n", rep.violations, rep.rows.size(),
                       100.0 * rep.violations / std::max<size_t>(1, rep.rows.size()), rep.max_abs_z);
        } else if (*mse_cmd) {
            fmt::print("{:.9g}\n", mse(read_pfm(mse_a), read_pfm(mse_b)));
        } else if (*modes_cmd) {
            const MaterialSpec mat = modes_mat.material();
            const RunConfig cfg = modes_run.config();
            std::string csv = furnace_header();
            for (VertexMode mode : {VertexMode::CancellationConsistent, VertexMode::Literal})
                for (double theta : modes_thetas) {
                    const auto r = oracle::furnace_albedo(from_degrees(theta), mat, {mode, cfg.max_bounces},
                                                          modes_samples, RandomStream(cfg.seed),
                                                          modes_run.oracle_estimator(), 0,
                                                          resolve_thread_count(cfg.threads));
                    csv += furnace_row(modes_mat, theta, modes_run.estimator, mode, r);
                }
            fmt::print("{}", csv);
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
