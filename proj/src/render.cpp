// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/render.h"

#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "msbsdf/estimators.h"
#include "msbsdf/parallel.h"

namespace msbsdf {

void RunConfig::validate() const {
    if (spp < 1)
        throw std::invalid_argument("spp must be at least 1");
    if (max_bounces < 1)
        throw std::invalid_argument("max_bounces must be at least 1");
}

namespace {

constexpr int kTile = 16;
constexpr int kEnvBsdfSamples = 4;

struct Ray {
    Vec3 o, d;
};

struct Hit {
    Vec3 p;
    Frame frame;
    double u = 0, v = 0;
};

std::optional<Hit> intersect(const SceneSpec& scene, const Ray& ray) {
    if (scene.geometry == Geometry::Sphere) {
        const double b = dot(ray.o, ray.d);
        const double c = dot(ray.o, ray.o) - 1.0;
        const double disc = b * b - c;
        if (disc < 0)
            return std::nullopt;
        const double root = std::sqrt(disc);
        double t = -b - root;
        if (t <= 1e-9)
            t = -b + root;
        if (t <= 1e-9)
            return std::nullopt;
        Hit h;
        h.p = ray.o + ray.d * t;
        const Vec3 n = normalize(h.p);
        Vec3 tangent = cross(Vec3{0, 0, 1}, n);
        if (length(tangent) < 1e-9)
            tangent = {1, 0, 0};
        h.frame = Frame::from_normal_tangent(n, tangent);
        double phi = std::atan2(n.y, n.x);
        if (phi < 0)
            phi += 2 * kPi;
        h.u = phi / (2 * kPi);
        h.v = std::acos(std::clamp(n.z, -1.0, 1.0)) / kPi;
        return h;
    }
    if (ray.d.z == 0)
        return std::nullopt;
    const double t = -ray.o.z / ray.d.z;
    if (t <= 1e-9)
        return std::nullopt;
    const Vec3 p = ray.o + ray.d * t;
    const double s = scene.slab_half_size;
    if (std::abs(p.x) > s || std::abs(p.y) > s)
        return std::nullopt;
    Hit h;
    h.p = {p.x, p.y, 0};
    h.frame = Frame{};
    h.u = (p.x + s) / (2 * s);
    h.v = (p.y + s) / (2 * s);
    return h;
}

Ray camera_ray(const Camera& cam, double px, double py) {
    const Vec3 forward = normalize(cam.look_at - cam.position);
    const Vec3 right = normalize(cross(forward, cam.up));
    const Vec3 up = cross(right, forward);
    const double tan_half = std::tan(cam.fov_deg * kPi / 360.0);
    const double aspect = static_cast<double>(cam.width) / cam.height;
    const double x = (2.0 * px / cam.width - 1.0) * tan_half * aspect;
    const double y = (1.0 - 2.0 * py / cam.height) * tan_half;
    return {cam.position, normalize(forward + right * x + up * y)};
}

// Cosine-distributed environment directions over the hemispheres the
// material can scatter into (both for dielectrics).
Direction env_direction(double u1, double u2, bool two_sided) {
    double sign = 1.0;
    if (two_sided) {
        sign = u1 < 0.5 ? 1.0 : -1.0;
        u1 = u1 < 0.5 ? 2.0 * u1 : 2.0 * u1 - 1.0;
    }
    const double r = std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi), sign * std::sqrt(std::max(0.0, 1.0 - u1))};
}

double env_pdf(const Direction& l, bool two_sided) {
    return two_sided ? std::abs(l.z) / (2.0 * kPi) : std::max(l.z, 0.0) * kInvPi;
}

Rgb evaluate(const BsdfQuery& q, const RunConfig& cfg, RandomStream& rs, Diagnostics* diag) {
    return cfg.estimator == EstimatorKind::PT ? eval_pt(q, rs, diag) : eval_bdpt(q, rs, diag);
}

MaterialSpec material_at(const SceneSpec& scene, const Hit& hit) {
    MaterialSpec mat = scene.material;
    if (scene.roughness_grid) {
        const double a = scene.roughness_grid->lookup(hit.u, hit.v);
        mat.roughness = RoughnessProfile(mat.roughness.family(), a, a);
    }
    return mat;
}

// Radiance towards the camera from one pixel sample. The BSDF is queried
// with the view direction as omega_i, so eval and sample() describe the
// same lobe.
Rgb shade(const SceneSpec& scene, const RunConfig& cfg, const Rgb& env, const Ray& ray, double env_u1,
          double env_u2, RandomStream& rs, Diagnostics* diag) {
    const auto hit = intersect(scene, ray);
    if (!hit)
        return env;
    const MaterialSpec mat = material_at(scene, *hit);
    Frame frame = hit->frame;
    Direction view = frame.to_local(-ray.d);
    // Conductors are two-sided.
    if (!mat.is_dielectric() && view.z < 0) {
        frame.t = -frame.t;
        frame.n = -frame.n;
        view = frame.to_local(-ray.d);
    }
    const EvalConventions conv{cfg.mode, cfg.max_bounces};
    Rgb radiance;
    for (const Light& light : scene.lights) {
        if (light.kind == Light::Kind::Directional) {
            const Direction l = frame.to_local(light.directional.to_light);
            const Rgb f = evaluate({view, l, mat, conv, 1}, cfg, rs, diag);
            radiance += f * light.directional.irradiance * std::abs(l.z);
        } else if (light.kind == Light::Kind::Point) {
            const Vec3 d = light.point.position - hit->p;
            const double r2 = dot(d, d);
            if (r2 <= 0)
                continue;
            const Direction l = frame.to_local(d / std::sqrt(r2));
            const Rgb f = evaluate({view, l, mat, conv, 1}, cfg, rs, diag);
            radiance += f * light.point.intensity * (std::abs(l.z) / r2);
        }
    }
    if (!env.is_black()) {
        // One light sample and kEnvBsdfSamples walks, balance heuristic with
        // sample counts.
        const bool two_sided = mat.is_dielectric();
        const double nb = kEnvBsdfSamples;
        const Direction l = env_direction(env_u1, env_u2, two_sided);
        const double light_pdf = env_pdf(l, two_sided);
        if (light_pdf > 0) {
            const Rgb f = evaluate({view, l, mat, conv, 1}, cfg, rs, diag);
            radiance += f * env * (std::abs(l.z) / (light_pdf + nb * pdf_proxy(view, l, mat)));
        }
        for (int i = 0; i < kEnvBsdfSamples; ++i) {
            const auto s = sample(view, mat, conv, rs, diag);
            if (!s)
                continue;
            if (s->delta) {
                radiance += s->weight * env / nb;
            } else {
                const double p = pdf_proxy(view, s->omega_o, mat);
                const double q = env_pdf(s->omega_o, two_sided);
                if (p > 0)
                    radiance += s->weight * env * (p / (nb * p + q));
            }
        }
    }
    return radiance;
}

}  // namespace

ImageBuffer render(const SceneSpec& scene, const RunConfig& cfg, Diagnostics* diag) {
    scene.validate();
    cfg.validate();
    Rgb env;
    for (const Light& l : scene.lights)
        if (l.kind == Light::Kind::Env)
            env += l.env.radiance;

    const Camera& cam = scene.camera;
    ImageBuffer img(cam.width, cam.height);
    const int tiles_x = (cam.width + kTile - 1) / kTile;
    const int tiles_y = (cam.height + kTile - 1) / kTile;
    std::vector<Diagnostics> tile_diag(static_cast<size_t>(tiles_x) * tiles_y);
    const RandomStream root(cfg.seed);

    parallel_for(static_cast<long>(tile_diag.size()), resolve_thread_count(cfg.threads), [&](long tile) {
        const int tx = static_cast<int>(tile % tiles_x), ty = static_cast<int>(tile / tiles_x);
        Diagnostics& d = tile_diag[tile];
        for (int y = ty * kTile; y < std::min(cam.height, (ty + 1) * kTile); ++y)
            for (int x = tx * kTile; x < std::min(cam.width, (tx + 1) * kTile); ++x) {
                RandomStream rs = root.split(static_cast<uint64_t>(y) * cam.width + x);
                // Environment samples are Latin-hypercube stratified over the
                // pixel's spp.
                std::vector<int> perm(cfg.spp);
                for (int i = 0; i < cfg.spp; ++i)
                    perm[i] = i;
                for (int i = cfg.spp - 1; i > 0; --i)
                    std::swap(perm[i], perm[static_cast<int>(rs.uniform() * (i + 1))]);
                Rgb sum;
                for (int s = 0; s < cfg.spp; ++s) {
                    const double jx = rs.uniform(), jy = rs.uniform();
                    const double u1 = (s + rs.uniform()) / cfg.spp;
                    const double u2 = (perm[s] + rs.uniform()) / cfg.spp;
                    const Rgb c = shade(scene, cfg, env, camera_ray(cam, x + jx, y + jy), u1, u2, rs, &d);
                    if (c.is_finite())
                        sum += c;
                    else
                        ++d.dropped_nonfinite;
                }
                const Rgb pixel = sum / cfg.spp;
                img.set(x, y, {std::max(pixel.r, 0.0), std::max(pixel.g, 0.0), std::max(pixel.b, 0.0)});
            }
    });
    if (diag)
        for (const auto& d : tile_diag)
            *diag += d;
    return img;
}

LobeTable lobe_tabulate(const Direction& omega_i, const MaterialSpec& mat, const RunConfig& cfg,
                        const oracle::QuadratureGrid& grid, int samples_per_node) {
    cfg.validate();
    const auto nodes = grid.nodes();
    LobeTable table;
    table.rows.resize(nodes.size());
    const EvalConventions conv{cfg.mode, cfg.max_bounces};
    const RandomStream root(cfg.seed);
    parallel_for(static_cast<long>(nodes.size()), resolve_thread_count(cfg.threads), [&](long i) {
        RandomStream rs = root.split(static_cast<uint64_t>(i));
        std::vector<Rgb> per;
        const Rgb total = eval_pt({omega_i, nodes[i].dir, mat, conv, samples_per_node}, rs, nullptr, &per);
        LobeRow& row = table.rows[i];
        row.theta_deg = std::acos(std::clamp(nodes[i].dir.z, -1.0, 1.0)) * 180.0 / kPi;
        double phi = std::atan2(nodes[i].dir.y, nodes[i].dir.x);
        if (phi < 0)
            phi += 2 * kPi;
        row.phi_deg = phi * 180.0 / kPi;
        row.weight = nodes[i].weight;
        row.rho1 = per.size() > 1 ? per[1].average() : 0.0;
        row.rho2 = per.size() > 2 ? per[2].average() : 0.0;
        for (size_t k = 3; k < per.size(); ++k)
            row.rho3plus += per[k].average();
        row.total = total.average();
    });
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double e = table.rows[i].total * std::abs(nodes[i].dir.z) * nodes[i].weight;
        if ((nodes[i].dir.z > 0) == (omega_i.z > 0))
            table.reflected += e;
        else
            table.transmitted += e;
    }
    return table;
}

std::string lobe_csv(const LobeTable& table) {
    std::string out = "theta_o_deg,phi_o_deg,weight,rho_1,rho_2,rho_3plus,rho_total\n";
    for (const auto& r : table.rows)
        out += fmt::format("{:.6f},{:.6f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.theta_deg, r.phi_deg, r.weight,
                           r.rho1, r.rho2, r.rho3plus, r.total);
    return out;
}

}  // namespace msbsdf
