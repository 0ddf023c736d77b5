// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/path.h"

#include <algorithm>
#include <stdexcept>

namespace msbsdf {

namespace {

constexpr double kIndexMatchTolerance = 1e-12;

// Vertex quantities in the frame of the incoming side: w points back along
// the incoming flow, o along the outgoing flow, h is the micronormal facing
// the incoming side.
struct VertexGeometry {
    Direction w, o, h;
    double eta_ratio = 1;  // far side over near side, refraction only
    bool has_h = false;
    bool valid = false;
};

double relative_eta(Side side, const MaterialSpec& mat) {
    const double eta = mat.dielectric_ior().eta;
    return side == Side::Upper ? eta : 1.0 / eta;
}

VertexGeometry vertex_geometry(const Direction& d_in, const Direction& d_out, Side side,
                               Branch branch, const MaterialSpec& mat) {
    VertexGeometry g;
    g.w = side_frame(-d_in, side);
    g.o = side_frame(d_out, side);
    if (branch == Branch::Reflect) {
        const auto h = half_vector(g.w, g.o);
        if (!h)
            return g;
        g.h = *h;
        g.has_h = true;
        g.valid = g.h.z > 0 && dot(g.w, g.h) > 0;
        return g;
    }
    if (!mat.is_dielectric())
        return g;
    g.eta_ratio = relative_eta(side, mat);
    if (std::abs(g.eta_ratio - 1.0) < kIndexMatchTolerance)
        return g;
    const Vec3 h = -(g.w + g.o * g.eta_ratio);
    const double len = length(h);
    if (!(len > 1e-12))
        return g;
    g.h = h / len;
    if (g.h.z < 0)
        g.h = -g.h;
    g.has_h = true;
    g.valid = g.h.z > 0 && dot(g.w, g.h) > 0 && dot(g.o, g.h) < 0;
    return g;
}

double abs_cos(const Direction& v) { return std::max(std::abs(v.z), kGrazingCos); }

// Reflectance at a vertex with the given cosine between w and h.
Rgb reflectance(double cos_wh, Side side, const MaterialSpec& mat) {
    if (mat.is_dielectric())
        return Rgb(fresnel_dielectric(side == Side::Upper ? cos_wh : -cos_wh, mat.dielectric_ior()));
    if (mat.unit_fresnel)
        return Rgb(1.0);
    return fresnel_conductor(cos_wh, mat.conductor_ior());
}

double refraction_denominator(const VertexGeometry& g) {
    const double s = dot(g.w, g.h) + g.eta_ratio * dot(g.o, g.h);
    return s * s;
}

// Whether d (leaving vertex `i - 1`) points into the half space of the
// micronormal that faces its own medium.
bool leaves_facet(const LightPath& path, const std::vector<Side>& sides, int i,
                  const MaterialSpec& mat) {
    const auto g = vertex_geometry(path.dirs[i - 1], path.dirs[i], sides[i - 1], path.branches[i - 1], mat);
    if (!g.has_h)
        return false;
    const Direction h_world = side_frame(g.h, sides[i - 1]);
    const Direction facing = path.branches[i - 1] == Branch::Reflect ? h_world : -h_world;
    return dot(path.dirs[i], facing) > 0;
}

bool enters_facet(const LightPath& path, const std::vector<Side>& sides, int i,
                  const MaterialSpec& mat) {
    const auto g = vertex_geometry(path.dirs[i], path.dirs[i + 1], sides[i], path.branches[i], mat);
    return g.has_h && dot(g.w, g.h) > 0;
}

// 1 - g1_dist for an upward local direction, without cancellation.
double blocked_fraction(const Direction& u, const RoughnessProfile& p) {
    const double lambda = smith_lambda(u, p);
    return lambda / (1.0 + lambda);
}

}  // namespace

LightPath::LightPath(std::vector<Direction> d)
    : dirs(std::move(d)), branches(dirs.empty() ? 0 : dirs.size() - 1, Branch::Reflect) {}

LightPath::LightPath(std::vector<Direction> d, std::vector<Branch> b)
    : dirs(std::move(d)), branches(std::move(b)) {
    if (!dirs.empty() && branches.size() != dirs.size() - 1)
        throw std::invalid_argument("LightPath needs one branch tag per vertex");
}

LightPath reverse(const LightPath& path) {
    LightPath r;
    r.dirs.reserve(path.dirs.size());
    for (auto it = path.dirs.rbegin(); it != path.dirs.rend(); ++it)
        r.dirs.push_back(-*it);
    r.branches.assign(path.branches.rbegin(), path.branches.rend());
    return r;
}

Side entry_side(const Direction& omega_i, const MaterialSpec& mat) {
    if (!mat.is_dielectric())
        return Side::Upper;
    return omega_i.z >= 0 ? Side::Upper : Side::Lower;
}

std::vector<Side> path_sides(const LightPath& path, const MaterialSpec& mat) {
    std::vector<Side> sides(path.dirs.size(), Side::Upper);
    if (path.dirs.empty())
        return sides;
    sides[0] = entry_side(-path.dirs[0], mat);
    for (size_t j = 0; j + 1 < path.dirs.size(); ++j)
        sides[j + 1] = path.branches[j] == Branch::Refract ? flip(sides[j]) : sides[j];
    return sides;
}

Rgb vertex_term(const Direction& d_in, const Direction& d_out, const MaterialSpec& mat,
                const EvalConventions& conv, Side side, Branch branch) {
    const auto g = vertex_geometry(d_in, d_out, side, branch, mat);
    if (!g.valid)
        return {};
    const double wh = dot(g.w, g.h);
    const double d = ndf_d(g.h, mat.roughness);
    const Rgb fr = reflectance(wh, side, mat);
    const bool literal = conv.mode == VertexMode::Literal;
    if (branch == Branch::Reflect) {
        const double denom = literal ? std::max(wh * wh, kGrazingCos * kGrazingCos)
                                     : abs_cos(g.w) * abs_cos(g.o);
        return fr * (d / (4.0 * denom));
    }
    const double denom2 = refraction_denominator(g);
    if (!(denom2 > 1e-24))
        return {};
    const double eta2 = g.eta_ratio * g.eta_ratio;
    double value = d * eta2 / denom2;
    if (!literal)
        value *= wh * std::abs(dot(g.o, g.h)) / (abs_cos(g.w) * abs_cos(g.o));
    return (Rgb(1.0) - fr) * value;
}

double exit_probability(const LightPath& path, int i, const MaterialSpec& mat) {
    const int k = path.bounces();
    if (i == 0)
        return 1.0;
    const auto sides = path_sides(path, mat);
    const Direction u = side_frame(path.dirs[i], sides[i]);
    if (u.z <= 0)
        return i == k ? 0.0 : 1.0;
    const bool visible = leaves_facet(path, sides, i, mat);
    if (i == k)
        return visible ? g1_dist(u, mat.roughness) : 0.0;
    return visible ? blocked_fraction(u, mat.roughness) : 1.0;
}

double entry_masking(const LightPath& path, int i, const MaterialSpec& mat) {
    if (i == path.bounces())
        return 1.0;
    const auto sides = path_sides(path, mat);
    if (!enters_facet(path, sides, i, mat))
        return 0.0;
    return g1_dist(side_frame(-path.dirs[i], sides[i]), mat.roughness);
}

double segment_term(const LightPath& path, int i, const MaterialSpec& mat) {
    const int k = path.bounces();
    if (i == 0)
        return entry_masking(path, 0, mat);
    if (i == k)
        return exit_probability(path, k, mat);
    const auto sides = path_sides(path, mat);
    if (!enters_facet(path, sides, i, mat))
        return 0.0;
    const Direction u = side_frame(path.dirs[i], sides[i]);
    // For an upward u, (1 - G1(u)) / Lambda(u) collapses to G1(u).
    if (u.z > 0 && leaves_facet(path, sides, i, mat))
        return g1_dist(u, mat.roughness);
    return g1_dist(-u, mat.roughness);
}

Rgb path_contribution(const LightPath& path, const MaterialSpec& mat, const EvalConventions& conv) {
    const int k = path.bounces();
    if (k < 1)
        return {};
    if (!mat.is_dielectric() &&
        std::any_of(path.branches.begin(), path.branches.end(), [](Branch b) { return b == Branch::Refract; }))
        return {};
    const auto sides = path_sides(path, mat);
    Rgb f(segment_term(path, 0, mat));
    for (int j = 0; j < k && !f.is_black(); ++j) {
        f *= vertex_term(path.dirs[j], path.dirs[j + 1], mat, conv, sides[j], path.branches[j]);
        f *= segment_term(path, j + 1, mat);
        if (conv.mode == VertexMode::CancellationConsistent && j + 1 < k)
            f *= abs_cos(path.dirs[j + 1]);
    }
    return f;
}

double direction_pdf(const Direction& d_in, const Direction& d_out, Side side, Branch branch,
                     const MaterialSpec& mat) {
    const auto g = vertex_geometry(d_in, d_out, side, branch, mat);
    if (!g.valid)
        return 0.0;
    const double wh = dot(g.w, g.h);
    const double pdf_m = pdf_vndf(g.w, g.h, mat.roughness);
    if (branch == Branch::Reflect) {
        double pdf = pdf_m / (4.0 * wh);
        if (mat.is_dielectric())
            pdf *= reflectance(wh, side, mat).r;
        return pdf;
    }
    const double denom2 = refraction_denominator(g);
    if (!(denom2 > 1e-24))
        return 0.0;
    const double jacobian = g.eta_ratio * g.eta_ratio * std::abs(dot(g.o, g.h)) / denom2;
    return pdf_m * jacobian * (1.0 - reflectance(wh, side, mat).r);
}

double continue_probability(const Direction& d, Side side, const MaterialSpec& mat) {
    const Direction u = side_frame(d, side);
    if (u.z <= 0)
        return 1.0;
    return blocked_fraction(u, mat.roughness);
}

double path_pdf_forward(const LightPath& path, const MaterialSpec& mat, const EvalConventions&) {
    const int k = path.bounces();
    if (k <= 1)
        return 1.0;
    const auto sides = path_sides(path, mat);
    double pdf = 1.0;
    for (int j = 0; j + 1 < k && pdf > 0; ++j) {
        pdf *= direction_pdf(path.dirs[j], path.dirs[j + 1], sides[j], path.branches[j], mat);
        pdf *= continue_probability(path.dirs[j + 1], sides[j + 1], mat);
    }
    return pdf;
}

double incoming_masking(const Direction& d, Side side, const MaterialSpec& mat) {
    return g1_dist(side_frame(-d, side), mat.roughness);
}

std::optional<DirectionSample> sample_direction(const Direction& d_in, Side side,
                                                const MaterialSpec& mat, RandomStream& rs) {
    const Direction w = side_frame(-d_in, side);
    const auto ms = sample_vndf(w, mat.roughness, rs);
    if (!(ms.density > 0))
        return std::nullopt;
    const Direction& h = ms.m;
    const double wh = dot(w, h);
    DirectionSample s;
    s.micronormal = h;
    s.side = side;
    if (!mat.is_dielectric()) {
        const Direction o = reflect(-w, h);
        s.d = side_frame(o, side);
        s.pdf = ms.density / (4.0 * wh);
        s.weight = reflectance(wh, side, mat);
        return s;
    }
    const double eta_ratio = relative_eta(side, mat);
    if (std::abs(eta_ratio - 1.0) < kIndexMatchTolerance) {
        // Index-matched interface: light crosses undeviated.
        s.d = d_in;
        s.branch = Branch::Refract;
        s.side = flip(side);
        s.delta = true;
        return s;
    }
    const double fr = reflectance(wh, side, mat).r;
    const double u = rs.uniform();
    std::optional<Direction> t;
    if (u >= fr)
        t = refract(-w, h, eta_ratio);
    if (!t) {
        const Direction o = reflect(-w, h);
        s.d = side_frame(o, side);
        s.pdf = ms.density / (4.0 * wh) * fr;
        return s;
    }
    const Direction& o = *t;
    VertexGeometry g;
    g.w = w;
    g.o = o;
    g.h = h;
    g.eta_ratio = eta_ratio;
    const double denom2 = refraction_denominator(g);
    if (!(denom2 > 1e-24))
        return std::nullopt;
    s.d = side_frame(o, side);
    s.branch = Branch::Refract;
    s.side = flip(side);
    s.pdf = ms.density * eta_ratio * eta_ratio * std::abs(dot(o, h)) / denom2 * (1.0 - fr);
    return s;
}

}  // namespace msbsdf
