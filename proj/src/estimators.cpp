// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/estimators.h"

#include <algorithm>

namespace msbsdf {

namespace {

Side exit_side(const Direction& omega_o, const MaterialSpec& mat) {
    return entry_side(omega_o, mat);
}

double abs_cos(const Direction& v) { return std::max(std::abs(v.z), kGrazingCos); }

// Segment terms of a direction according to its position in a path. The
// interior form is e * p with both Heaviside factors already satisfied,
// which reduces to G1 of the upward-flipped direction.
double first_segment(const Direction& d, Side side, const MaterialSpec& mat) {
    return incoming_masking(d, side, mat);
}

double last_segment(const Direction& d, Side side, const MaterialSpec& mat) {
    const Direction u = side_frame(d, side);
    return u.z > 0 ? g1_dist(u, mat.roughness) : 0.0;
}

double interior_segment(const Direction& d, Side side, const MaterialSpec& mat) {
    Direction u = side_frame(d, side);
    u.z = std::abs(u.z);
    return g1_dist(u, mat.roughness);
}

Branch connect_branch(Side from, Side to) {
    return from == to ? Branch::Reflect : Branch::Refract;
}

struct WalkVertex {
    Direction d;
    Side side = Side::Upper;
    Branch branch = Branch::Reflect;  // branch of the vertex this direction leaves
};

// Directions d_0..d_{n-1} of a walk from d0 that keeps only the
// directions after which it decided to continue.
std::vector<WalkVertex> random_walk(const Direction& d0, Side s0, const MaterialSpec& mat,
                                    int max_dirs, RandomStream& rs) {
    std::vector<WalkVertex> out;
    out.reserve(max_dirs);
    out.push_back({d0, s0, Branch::Reflect});
    while (static_cast<int>(out.size()) < max_dirs) {
        const auto& cur = out.back();
        const auto ds = sample_direction(cur.d, cur.side, mat, rs);
        if (!ds || ds->delta)
            break;
        if (rs.uniform() >= continue_probability(ds->d, ds->side, mat))
            break;
        out.push_back({ds->d, ds->side, ds->branch});
    }
    return out;
}

}  // namespace

Rgb eval_pt(const BsdfQuery& q, RandomStream& rs, Diagnostics* diag, std::vector<Rgb>* per_bounce) {
    const MaterialSpec& mat = q.mat;
    const EvalConventions& conv = q.conv;
    const bool consistent = conv.mode == VertexMode::CancellationConsistent;
    const Side out_side = exit_side(q.omega_o, mat);
    const double exit_term = last_segment(q.omega_o, out_side, mat);
    const int n = std::max(1, q.n_samples);
    if (per_bounce)
        per_bounce->assign(conv.max_bounces + 1, Rgb{});

    Rgb sum;
    for (int sample_index = 0; sample_index < n; ++sample_index) {
        if (diag)
            ++diag->walks;
        Direction d = -q.omega_i;
        Side side = entry_side(q.omega_i, mat);
        Rgb weight(1.0);
        Rgb throughput(first_segment(d, side, mat));
        for (int vertex = 0; vertex < conv.max_bounces; ++vertex) {
            if (exit_term > 0 && (mat.is_dielectric() || side == out_side)) {
                const Branch b = connect_branch(side, out_side);
                const Rgb c = throughput * vertex_term(d, q.omega_o, mat, conv, side, b) * exit_term;
                if (c.is_finite()) {
                    sum += c;
                    if (per_bounce)
                        (*per_bounce)[vertex + 1] += c;
                } else if (diag) {
                    ++diag->dropped_nonfinite;
                }
            }
            if (vertex + 1 == conv.max_bounces)
                break;
            const auto ds = sample_direction(d, side, mat, rs);
            if (!ds || ds->delta)
                break;
            if (rs.uniform() >= continue_probability(ds->d, ds->side, mat))
                break;
            const double masking = incoming_masking(ds->d, ds->side, mat);
            if (consistent) {
                weight *= ds->weight;
                throughput = weight * masking;
            } else {
                throughput *= vertex_term(d, ds->d, mat, conv, side, ds->branch) * (masking / ds->pdf);
            }
            if (!throughput.is_finite()) {
                if (diag)
                    ++diag->dropped_nonfinite;
                break;
            }
            d = ds->d;
            side = ds->side;
        }
    }
    if (per_bounce)
        for (auto& c : *per_bounce)
            c = c / n;
    return sum / n;
}

Rgb eval_bdpt(const BsdfQuery& q, RandomStream& rs, Diagnostics* diag, std::vector<BdptStrategy>* trace) {
    const MaterialSpec& mat = q.mat;
    const EvalConventions& conv = q.conv;
    const bool consistent = conv.mode == VertexMode::CancellationConsistent;
    const int max_dirs = conv.max_bounces;
    const int n_samples = std::max(1, q.n_samples);
    const Side cam_side = entry_side(q.omega_i, mat);
    const Side light_side = exit_side(q.omega_o, mat);
    const double exit_term = last_segment(q.omega_o, light_side, mat);

    auto fold = [&](const Direction& d) { return consistent ? abs_cos(d) : 1.0; };

    Rgb sum;
    for (int sample_index = 0; sample_index < n_samples; ++sample_index) {
        if (trace)
            trace->clear();
        if (diag)
            ++diag->walks;
        if (exit_term <= 0)
            continue;
        const auto cam = random_walk(-q.omega_i, cam_side, mat, max_dirs, rs);
        const auto light = random_walk(-q.omega_o, light_side, mat, max_dirs, rs);
        const int sc = static_cast<int>(cam.size());
        const int sl = static_cast<int>(light.size());

        // Camera prefix products and pdfs.
        std::vector<Rgb> cam_prefix(sc + 1);
        std::vector<double> fwd_c(std::max(sc - 1, 0)), rev_c(std::max(sc - 1, 0));
        cam_prefix[1] = Rgb(first_segment(cam[0].d, cam[0].side, mat));
        for (int j = 1; j < sc; ++j) {
            const Rgb v = vertex_term(cam[j - 1].d, cam[j].d, mat, conv, cam[j - 1].side, cam[j].branch);
            cam_prefix[j + 1] = cam_prefix[j] * v * (interior_segment(cam[j].d, cam[j].side, mat) * fold(cam[j].d));
        }
        for (int j = 0; j + 1 < sc; ++j) {
            fwd_c[j] = direction_pdf(cam[j].d, cam[j + 1].d, cam[j].side, cam[j + 1].branch, mat) *
                       continue_probability(cam[j + 1].d, cam[j + 1].side, mat);
            if (j >= 1)
                rev_c[j] = direction_pdf(-cam[j + 1].d, -cam[j].d, cam[j + 1].side, cam[j + 1].branch, mat) *
                           continue_probability(-cam[j].d, cam[j].side, mat);
        }

        // Light suffix products (evaluated in the forward flow) and pdfs.
        std::vector<Rgb> light_suffix(sl + 1);
        std::vector<double> fwd_l(std::max(sl - 1, 0)), rev_l(std::max(sl - 1, 0));
        light_suffix[1] = Rgb(exit_term);
        for (int m = 1; m < sl; ++m) {
            const Rgb v = vertex_term(-light[m].d, -light[m - 1].d, mat, conv, light[m].side, light[m].branch);
            light_suffix[m + 1] =
                light_suffix[m] * v * (interior_segment(light[m].d, light[m].side, mat) * fold(light[m].d));
        }
        for (int m = 0; m + 1 < sl; ++m) {
            rev_l[m] = direction_pdf(light[m].d, light[m + 1].d, light[m].side, light[m + 1].branch, mat) *
                       continue_probability(light[m + 1].d, light[m + 1].side, mat);
            if (m >= 1)
                fwd_l[m] = direction_pdf(-light[m + 1].d, -light[m].d, light[m + 1].side, light[m + 1].branch, mat) *
                           continue_probability(-light[m].d, light[m].side, mat);
        }

        std::vector<double> fwd, rev, pdfs;
        for (int s = 1; s <= sc; ++s) {
            for (int t = 1; t <= sl && s + t <= max_dirs + 1; ++t) {
                const WalkVertex& c = cam[s - 1];
                const WalkVertex& l = light[t - 1];
                if (!mat.is_dielectric() && c.side != l.side)
                    continue;
                const Branch b = connect_branch(c.side, l.side);
                const Rgb v = vertex_term(c.d, -l.d, mat, conv, c.side, b);
                const Rgb f = cam_prefix[s] * v * light_suffix[t];
                if (f.is_black())
                    continue;
                const int n = s + t;
                fwd.assign(n, 0.0);
                rev.assign(n, 0.0);
                for (int j = 0; j + 3 <= n; ++j) {
                    if (j < s - 1)
                        fwd[j] = fwd_c[j];
                    else if (j == s - 1)
                        fwd[j] = direction_pdf(c.d, -l.d, c.side, b, mat) * continue_probability(-l.d, l.side, mat);
                    else
                        fwd[j] = fwd_l[n - 2 - j];
                }
                for (int j = 1; j + 2 <= n; ++j) {
                    if (j < s - 1)
                        rev[j] = rev_c[j];
                    else if (j == s - 1)
                        rev[j] = direction_pdf(l.d, -c.d, l.side, b, mat) * continue_probability(-c.d, c.side, mat);
                    else
                        rev[j] = rev_l[n - 2 - j];
                }
                pdfs.assign(n, 0.0);
                double pdf_sum = 0;
                for (int sp = 1; sp <= n - 1; ++sp) {
                    double p = 1.0;
                    for (int j = 0; j <= sp - 2; ++j)
                        p *= fwd[j];
                    for (int j = sp; j <= n - 2; ++j)
                        p *= rev[j];
                    pdfs[sp] = p;
                    pdf_sum += p;
                }
                if (!(pdf_sum > 0) || !(pdfs[s] > 0))
                    continue;
                const Rgb c_val = f / pdf_sum;
                if (!c_val.is_finite()) {
                    if (diag)
                        ++diag->dropped_nonfinite;
                    continue;
                }
                sum += c_val;
                if (trace) {
                    BdptStrategy st;
                    st.camera_dirs = s;
                    st.light_dirs = t;
                    for (int j = 0; j < s; ++j)
                        st.path.dirs.push_back(cam[j].d);
                    for (int m = t - 1; m >= 0; --m)
                        st.path.dirs.push_back(-light[m].d);
                    for (int j = 1; j < s; ++j)
                        st.path.branches.push_back(cam[j].branch);
                    st.path.branches.push_back(b);
                    for (int m = t - 1; m >= 1; --m)
                        st.path.branches.push_back(light[m].branch);
                    st.f = f;
                    st.pdf = pdfs[s];
                    st.pdf_sum = pdf_sum;
                    trace->push_back(std::move(st));
                }
            }
        }
    }
    return sum / n_samples;
}

std::optional<SampleRecord> sample(const Direction& omega_i, const MaterialSpec& mat,
                                   const EvalConventions& conv, RandomStream& rs,
                                   Diagnostics* diag, LightPath* path_out) {
    const bool consistent = conv.mode == VertexMode::CancellationConsistent;
    if (diag)
        ++diag->walks;
    const Side start = entry_side(omega_i, mat);
    Direction d = -omega_i;
    Side side = start;
    Rgb weight(1.0);
    Rgb throughput(first_segment(d, side, mat));
    bool delta = false;
    if (path_out) {
        path_out->dirs.assign(1, d);
        path_out->branches.clear();
    }
    for (int bounce = 1; bounce <= conv.max_bounces; ++bounce) {
        const auto ds = sample_direction(d, side, mat, rs);
        if (!ds)
            break;
        if (path_out) {
            path_out->dirs.push_back(ds->d);
            path_out->branches.push_back(ds->branch);
        }
        delta = delta || ds->delta;
        const bool leaving = side_frame(ds->d, ds->side).z > 0;
        const bool exits = leaving && rs.uniform() >= continue_probability(ds->d, ds->side, mat);
        if (consistent || ds->delta) {
            weight *= ds->weight;
        } else {
            const Rgb step = vertex_term(d, ds->d, mat, conv, side, ds->branch) * (1.0 / ds->pdf);
            if (exits)
                weight = throughput * step * abs_cos(ds->d);
            else
                throughput *= step * incoming_masking(ds->d, ds->side, mat);
        }
        if (exits) {
            if (!weight.is_finite()) {
                if (diag) {
                    ++diag->dropped_nonfinite;
                    ++diag->failed_walks;
                }
                return std::nullopt;
            }
            SampleRecord r;
            r.omega_o = ds->d;
            r.weight = weight;
            r.bounce_count = bounce;
            r.lobe = ds->side == start ? Lobe::Reflected : Lobe::Transmitted;
            r.delta = delta;
            return r;
        }
        d = ds->d;
        side = ds->side;
    }
    if (diag)
        ++diag->failed_walks;
    return std::nullopt;
}

Rgb eval_single_bounce(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat) {
    const RoughnessProfile& r = mat.roughness;
    const Side s_in = entry_side(omega_i, mat);
    const Side s_out = exit_side(omega_o, mat);
    const Direction wi = side_frame(omega_i, s_in);
    const Direction wo_own = side_frame(omega_o, s_out);
    if (wi.z <= 0 || wo_own.z <= 0)
        return {};
    const Direction wo = side_frame(omega_o, s_in);
    const auto smith = [&](const Direction& v, const Direction& m) {
        if (dot(v, m) <= 0)
            return 0.0;
        return 1.0 / (1.0 + smith_lambda(v, r));
    };
    if (s_in == s_out) {
        const Vec3 sum = wi + wo;
        if (dot(sum, sum) < 1e-24)
            return {};
        const Direction h = normalize(sum);
        const double cos_ih = dot(wi, h);
        Rgb fr;
        if (mat.is_dielectric())
            fr = Rgb(fresnel_dielectric(s_in == Side::Upper ? cos_ih : -cos_ih, mat.dielectric_ior()));
        else
            fr = mat.unit_fresnel ? Rgb(1.0) : fresnel_conductor(cos_ih, mat.conductor_ior());
        const double g = smith(wi, h) * smith(wo, h);
        return fr * (ndf_d(h, r) * g / (4.0 * wi.z * wo.z));
    }
    // Transmission, Walter et al. form with the relative index of the far side.
    const double eta = s_in == Side::Upper ? mat.dielectric_ior().eta : 1.0 / mat.dielectric_ior().eta;
    if (std::abs(eta - 1.0) < 1e-12)
        return {};
    Vec3 hv = -(wi + wo * eta);
    if (dot(hv, hv) < 1e-24)
        return {};
    Direction h = normalize(hv);
    if (h.z < 0)
        h = -h;
    const double cos_ih = dot(wi, h), cos_oh = dot(wo, h);
    if (cos_ih <= 0 || cos_oh >= 0)
        return {};
    const double fr = fresnel_dielectric(s_in == Side::Upper ? cos_ih : -cos_ih, mat.dielectric_ior());
    const Direction h_out = side_frame(-side_frame(h, s_in), s_out);
    const double g = smith(wi, h) * smith(wo_own, h_out);
    const double denom = cos_ih + eta * cos_oh;
    const double value = ndf_d(h, r) * g * (1.0 - fr) * eta * eta * cos_ih * -cos_oh /
                         (denom * denom * wi.z * std::abs(wo.z));
    return Rgb(value);
}

double pdf_single(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat) {
    const Side side = entry_side(omega_i, mat);
    double pdf = direction_pdf(-omega_i, omega_o, side, Branch::Reflect, mat);
    if (mat.is_dielectric())
        pdf += direction_pdf(-omega_i, omega_o, side, Branch::Refract, mat);
    return pdf;
}

double pdf_proxy(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat,
                 double single_weight) {
    const double diffuse = mat.is_dielectric() ? std::abs(omega_o.z) / (2.0 * kPi)
                                               : std::max(omega_o.z, 0.0) * kInvPi;
    return single_weight * pdf_single(omega_i, omega_o, mat) + (1.0 - single_weight) * diffuse;
}

}  // namespace msbsdf
