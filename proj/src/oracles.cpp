// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/oracles.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "msbsdf/parallel.h"
#include "msbsdf/path.h"

namespace msbsdf::oracle {

namespace {

constexpr long kChunk = 4096;

struct Moments {
    double sum = 0, sum2 = 0;
    long count = 0;
    Moments& operator+=(const Moments& o) {
        sum += o.sum;
        sum2 += o.sum2;
        count += o.count;
        return *this;
    }
    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++count;
    }
    double mean() const { return count ? sum / count : 0.0; }
    double standard_error() const {
        if (count < 2)
            return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum2 / count - m * m)) * count / (count - 1);
        return std::sqrt(var / count);
    }
};

Rgb estimate(Estimator est, const BsdfQuery& q, RandomStream& rs, Diagnostics* diag) {
    return est == Estimator::PT ? eval_pt(q, rs, diag) : eval_bdpt(q, rs, diag);
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_legendre needs n >= 1");
    GaussLegendre g;
    g.nodes.assign(n, 0.0);
    g.weights.assign(n, 0.0);
    const auto legendre = [n](double x, double& p_prev) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        p_prev = p0;
        return p1;
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p_prev;
            const double p = legendre(x, p_prev);
            const double dx = p / (n * (x * p - p_prev) / (x * x - 1.0));
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double p_prev;
        const double p = legendre(x, p_prev);
        const double dp = n * (x * p - p_prev) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.nodes[i] = -x;
        g.nodes[n - 1 - i] = x;
        g.weights[i] = g.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        g.nodes[n / 2] = 0.0;
    return g;
}

std::vector<QuadratureNode> QuadratureGrid::nodes() const {
    std::vector<double> z, wz;
    if (rule == QuadratureRule::GaussLegendre) {
        const auto g = gauss_legendre(n_theta);
        for (int i = 0; i < n_theta; ++i) {
            z.push_back(0.5 * (g.nodes[i] + 1.0));
            wz.push_back(0.5 * g.weights[i]);
        }
    } else {
        for (int i = 0; i < n_theta; ++i) {
            z.push_back((i + 0.5) / n_theta);
            wz.push_back(1.0 / n_theta);
        }
    }
    const double wphi = 2.0 * kPi / n_phi;
    std::vector<QuadratureNode> out;
    const int hemis = domain == QuadratureDomain::FullSphere ? 2 : 1;
    out.reserve(static_cast<size_t>(hemis) * n_theta * n_phi);
    for (int h = 0; h < hemis; ++h) {
        const double sign = h == 0 ? 1.0 : -1.0;
        for (int i = 0; i < n_theta; ++i) {
            const double r = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
            for (int j = 0; j < n_phi; ++j) {
                const double phi = wphi * (j + 0.5);
                out.push_back({{r * std::cos(phi), r * std::sin(phi), sign * z[i]}, wz[i] * wphi});
            }
        }
    }
    return out;
}

double lambda_numeric(const Direction& w, const RoughnessProfile& p, int nodes) {
    const double ax = p.alpha_x(), ay = p.alpha_y();
    // Stretched slope space: slopes (ax u, ay v); the visible projected area
    // is the integral of max(0, w.z - rx u - ry v) against the standard
    // slope density.
    const double rx = ax * w.x, ry = ay * w.y;
    const double r = std::hypot(rx, ry);
    const double wz = w.z;
    if (std::abs(wz) < 1e-12)
        throw std::invalid_argument("lambda_numeric: horizontal direction");
    const auto slope_density = [&](double u, double v) {
        const Direction m = normalize({-ax * u, -ay * v, 1.0});
        const double mz2 = m.z * m.z;
        return ax * ay * ndf_d(m, p) * mz2 * mz2;
    };
    const int n_radial = std::max(64, nodes / 8);
    const int n_angle = std::max(64, nodes / 4);
    const auto gr = gauss_legendre(n_radial);
    const auto ga = gauss_legendre(n_angle);
    const double psi0 = r > 0 ? std::atan2(ry, rx) : 0.0;

    // Integral over rho of max(0, wz - c rho) P rho with rho = t / (1 - t).
    const auto radial = [&](double cos_psi, double sin_psi, double c) {
        double t_lo = 0.0, t_hi = 1.0;
        if (c > 0) {
            if (wz <= 0)
                return 0.0;
            const double rho_star = wz / c;
            t_hi = rho_star / (1.0 + rho_star);
        } else if (c < 0 && wz < 0) {
            const double rho_star = wz / c;
            t_lo = rho_star / (1.0 + rho_star);
        } else if (c == 0 && wz <= 0) {
            return 0.0;
        }
        const double half = 0.5 * (t_hi - t_lo), mid = 0.5 * (t_hi + t_lo);
        double acc = 0;
        for (int k = 0; k < n_radial; ++k) {
            const double t = mid + half * gr.nodes[k];
            const double one_minus = 1.0 - t;
            const double rho = t / one_minus;
            const double val = std::max(0.0, wz - c * rho) *
                               slope_density(rho * cos_psi, rho * sin_psi) * rho / (one_minus * one_minus);
            acc += gr.weights[k] * val;
        }
        return acc * half;
    };

    double area = 0;
    // Two angular panels split where the linear term changes sign.
    for (int panel = 0; panel < 2; ++panel) {
        const double a0 = psi0 - 0.5 * kPi + panel * kPi;
        const double half = 0.5 * kPi, mid = a0 + half;
        double acc = 0;
        for (int k = 0; k < n_angle; ++k) {
            const double psi = mid + half * ga.nodes[k];
            const double cp = std::cos(psi), sp = std::sin(psi);
            const double c = rx * cp + ry * sp;
            acc += ga.weights[k] * radial(cp, sp, c);
        }
        area += acc * half;
    }
    return area / wz - 1.0;
}

Rgb rho2_quadrature(const Direction& omega_i, const Direction& omega_o, const MaterialSpec& mat,
                    const EvalConventions& conv, const QuadratureGrid& grid) {
    const Side s_in = entry_side(omega_i, mat);
    const Side s_out = entry_side(omega_o, mat);
    // Length 2.
    Rgb total;
    if (mat.is_dielectric() || s_in == s_out) {
        const Branch b = s_in == s_out ? Branch::Reflect : Branch::Refract;
        total += path_contribution(LightPath({-omega_i, omega_o}, {b}), mat, conv);
    }
    // Length 3: every branch pair consistent with the end media.
    std::vector<std::pair<Branch, Branch>> combos;
    if (!mat.is_dielectric()) {
        combos.push_back({Branch::Reflect, Branch::Reflect});
    } else {
        for (Branch b0 : {Branch::Reflect, Branch::Refract})
            for (Branch b1 : {Branch::Reflect, Branch::Refract}) {
                const Side mid = b0 == Branch::Refract ? flip(s_in) : s_in;
                const Side end = b1 == Branch::Refract ? flip(mid) : mid;
                if (end == s_out)
                    combos.push_back({b0, b1});
            }
    }
    Rgb integral;
    for (const auto& node : grid.nodes())
        for (const auto& [b0, b1] : combos)
            integral += path_contribution(LightPath({-omega_i, node.dir, omega_o}, {b0, b1}), mat, conv) *
                        node.weight;
    return total + integral;
}

MeanEstimate chunked_mean(long n, const RandomStream& rs, int threads,
                          const std::function<double(RandomStream&)>& fn) {
    const long chunks = (n + kChunk - 1) / kChunk;
    std::vector<Moments> parts(chunks);
    parallel_for(chunks, threads, [&](long c) {
        RandomStream local = rs.split(static_cast<uint64_t>(c));
        const long end = std::min(n, (c + 1) * kChunk);
        for (long i = c * kChunk; i < end; ++i)
            parts[c].add(fn(local));
    });
    Moments all;
    for (const auto& m : parts)
        all += m;
    return {all.mean(), all.standard_error()};
}

FurnaceResult furnace_albedo(const Direction& omega_i, const MaterialSpec& mat, const EvalConventions& conv,
                             long n, const RandomStream& rs, Estimator est, long n_sampler, int threads) {
    FurnaceResult res;
    const bool sphere = mat.is_dielectric();
    const Side s_in = entry_side(omega_i, mat);
    // Stratify omega_o on a rows x (2 rows) grid, uniform in z and phi.
    const long rows = std::max(1L, std::lround(std::sqrt(static_cast<double>(n) / 2.0)));
    const long cols = 2 * rows;
    const long strata = rows * cols;
    const double measure = sphere ? 4.0 * kPi : 2.0 * kPi;

    const long chunks = (strata + kChunk - 1) / kChunk;
    struct Part {
        Moments all;
        double reflected = 0, transmitted = 0;
        Diagnostics diag;
    };
    std::vector<Part> parts(chunks);
    const RandomStream eval_rs = rs.split(1);
    parallel_for(chunks, threads, [&](long c) {
        RandomStream local = eval_rs.split(static_cast<uint64_t>(c));
        Part& part = parts[c];
        const long end = std::min(strata, (c + 1) * kChunk);
        for (long i = c * kChunk; i < end; ++i) {
            const long a = i / cols, b = i % cols;
            const double u = (a + local.uniform()) / rows;
            const double v = (b + local.uniform()) / cols;
            const double z = sphere ? 1.0 - 2.0 * u : u;
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.0 * kPi * v;
            const Direction wo{sin_t * std::cos(phi), sin_t * std::sin(phi), z};
            const BsdfQuery q{omega_i, wo, mat, conv, 1};
            const double val = estimate(est, q, local, &part.diag).average() * std::abs(z) * measure;
            part.all.add(val);
            if (entry_side(wo, mat) == s_in)
                part.reflected += val;
            else
                part.transmitted += val;
        }
    });
    Moments all;
    double refl = 0, trans = 0;
    for (const auto& p : parts) {
        all += p.all;
        refl += p.reflected;
        trans += p.transmitted;
        res.diagnostics += p.diag;
    }
    res.eval_albedo = all.mean();
    res.eval_stderr = all.standard_error();
    res.reflected = refl / std::max(1L, all.count);
    res.transmitted = trans / std::max(1L, all.count);

    if (n_sampler > 0) {
        const long s_chunks = (n_sampler + kChunk - 1) / kChunk;
        std::vector<Moments> sp(s_chunks);
        std::vector<Diagnostics> sd(s_chunks);
        const RandomStream sample_rs = rs.split(2);
        parallel_for(s_chunks, threads, [&](long c) {
            RandomStream local = sample_rs.split(static_cast<uint64_t>(c));
            const long end = std::min(n_sampler, (c + 1) * kChunk);
            for (long i = c * kChunk; i < end; ++i) {
                const auto r = sample(omega_i, mat, conv, local, &sd[c]);
                sp[c].add(r ? r->weight.average() : 0.0);
            }
        });
        Moments s_all;
        Diagnostics s_diag;
        for (long c = 0; c < s_chunks; ++c) {
            s_all += sp[c];
            s_diag += sd[c];
        }
        res.sampler_albedo = s_all.mean();
        res.sampler_failure_rate = static_cast<double>(s_diag.failed_walks) / n_sampler;
        res.diagnostics += s_diag;
    }
    return res;
}

ReciprocityReport reciprocity_sweep(const MaterialSpec& mat, const EvalConventions& conv,
                                    const std::vector<Direction>& dirs_i, const std::vector<Direction>& dirs_o,
                                    long n, const RandomStream& rs, Estimator est, int threads) {
    ReciprocityReport rep;
    const long pairs = static_cast<long>(dirs_i.size() * dirs_o.size());
    rep.rows.resize(pairs);
    parallel_for(2 * pairs, threads, [&](long task) {
        const long idx = task / 2;
        const bool backward = task % 2 == 1;
        const Direction a = dirs_i[idx / dirs_o.size()];
        const Direction b = dirs_o[idx % dirs_o.size()];
        const BsdfQuery q{backward ? b : a, backward ? a : b, mat, conv, 1};
        const auto m = chunked_mean(n, rs.split(static_cast<uint64_t>(task)), 1, [&](RandomStream& local) {
            return estimate(est, q, local, nullptr).average();
        });
        auto& row = rep.rows[idx];
        row.omega_i = a;
        row.omega_o = b;
        if (backward) {
            row.backward = m.mean;
            row.backward_se = m.standard_error;
        } else {
            row.forward = m.mean;
            row.forward_se = m.standard_error;
        }
    });
    for (auto& row : rep.rows) {
        const double se = std::hypot(row.forward_se, row.backward_se);
        const double diff = row.forward - row.backward;
        row.z_score = se > 0 ? diff / se : (diff == 0 ? 0.0 : INFINITY);
        row.violation = std::abs(row.z_score) > 3.0;
        rep.violations += row.violation ? 1 : 0;
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z_score));
    }
    return rep;
}

ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected,
                           double min_expected) {
    return chi_square(observed, expected, std::vector<double>(expected.size(), 0.0), min_expected);
}

ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected,
                           const std::vector<double>& expected_variance, double min_expected) {
    if (observed.size() != expected.size() || expected_variance.size() != expected.size())
        throw std::invalid_argument("chi_square: bin count mismatch");
    struct Bin {
        double o = 0, e = 0, v = 0;
    };
    std::vector<Bin> bins;
    Bin acc;
    for (size_t i = 0; i < observed.size(); ++i) {
        acc.o += observed[i];
        acc.e += expected[i];
        acc.v += expected_variance[i];
        if (acc.e >= min_expected) {
            bins.push_back(acc);
            acc = {};
        }
    }
    if (acc.e > 0 || acc.o > 0) {
        if (bins.empty()) {
            bins.push_back(acc);
        } else {
            bins.back().o += acc.o;
            bins.back().e += acc.e;
            bins.back().v += acc.v;
        }
    }
    if (bins.size() < 2 || bins.front().e < min_expected)
        throw std::invalid_argument(
            "chi_square: fewer than two bins with enough expected counts; merge bins or add samples");
    ChiSquareResult r;
    for (const auto& b : bins)
        r.statistic += (b.o - b.e) * (b.o - b.e) / (b.e + b.v);
    r.pooled_bins = static_cast<int>(bins.size());
    r.dof = r.pooled_bins - 1;
    r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

VndfCheck vndf_chi_square(const Direction& w, const RoughnessProfile& p, long n, const RandomStream& rs,
                          int n_theta, int n_phi) {
    VndfCheck out;
    const int bins = n_theta * n_phi;
    std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
    RandomStream local = rs;
    for (long i = 0; i < n; ++i) {
        const auto s = sample_vndf(w, p, local);
        if (dot(w, s.m) <= 0)
            ++out.invisible;
        const double ref = pdf_vndf(w, s.m, p);
        if (ref > 0)
            out.max_density_error = std::max(out.max_density_error, std::abs(s.density - ref) / ref);
        const double z = std::clamp(s.m.z, 0.0, 1.0 - 1e-16);
        double phi = std::atan2(s.m.y, s.m.x);
        if (phi < 0)
            phi += 2.0 * kPi;
        const int a = std::min(n_theta - 1, static_cast<int>(z * n_theta));
        const int b = std::min(n_phi - 1, static_cast<int>(phi / (2.0 * kPi) * n_phi));
        observed[a * n_phi + b] += 1;
    }
    const int sub = 8;
    const auto g = gauss_legendre(sub);
    double total = 0;
    for (int a = 0; a < n_theta; ++a)
        for (int b = 0; b < n_phi; ++b) {
            double acc = 0;
            for (int i = 0; i < sub; ++i)
                for (int j = 0; j < sub; ++j) {
                    const double z = (a + 0.5 * (g.nodes[i] + 1.0)) / n_theta;
                    const double phi = 2.0 * kPi * (b + 0.5 * (g.nodes[j] + 1.0)) / n_phi;
                    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                    const Direction m{r * std::cos(phi), r * std::sin(phi), z};
                    acc += 0.25 * g.weights[i] * g.weights[j] * pdf_vndf(w, m, p);
                }
            const double mass = acc * (1.0 / n_theta) * (2.0 * kPi / n_phi);
            expected[a * n_phi + b] = mass * n;
            total += mass;
        }
    out.normalization = total;
    out.chi = chi_square(observed, expected);
    return out;
}

SamplerCheck sampler_chi_square(const Direction& omega_i, const MaterialSpec& mat, const EvalConventions& conv,
                                long n_walks, long evals_per_bin, const RandomStream& rs, int n_theta, int n_phi,
                                int threads) {
    const bool both = mat.is_dielectric();
    const int hemis = both ? 2 : 1;
    const int per_hemi = n_theta * n_phi;
    const int bins = hemis * per_hemi;
    const double bin_area = (1.0 / n_theta) * (2.0 * kPi / n_phi);
    // Hemisphere 0 is the upper one; cos theta bins run from the horizon.
    auto bin_of = [&](const Direction& d) {
        const int h = d.z >= 0 ? 0 : 1;
        const double c = std::min(std::abs(d.z), 1.0 - 1e-16);
        double phi = std::atan2(d.y, d.x);
        if (phi < 0)
            phi += 2.0 * kPi;
        const int a = std::min(n_theta - 1, static_cast<int>(c * n_theta));
        const int b = std::min(n_phi - 1, static_cast<int>(phi / (2.0 * kPi) * n_phi));
        return h * per_hemi + a * n_phi + b;
    };

    SamplerCheck out;
    out.walks = n_walks;
    const long chunks = (n_walks + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> counts(chunks);
    std::vector<long> failed(chunks, 0);
    const RandomStream walk_root = rs.split(1);
    parallel_for(chunks, threads, [&](long c) {
        RandomStream local = walk_root.split(static_cast<uint64_t>(c));
        counts[c].assign(bins, 0.0);
        const long end = std::min(n_walks, (c + 1) * kChunk);
        for (long i = c * kChunk; i < end; ++i) {
            const auto s = sample(omega_i, mat, conv, local);
            if (!s || (!both && s->omega_o.z < 0)) {
                ++failed[c];
                continue;
            }
            counts[c][bin_of(s->omega_o)] += 1;
        }
    });
    std::vector<double> observed(bins, 0.0);
    for (long c = 0; c < chunks; ++c) {
        out.failed += failed[c];
        for (int b = 0; b < bins; ++b)
            observed[b] += counts[c][b];
    }

    std::vector<double> expected(bins, 0.0), variance(bins, 0.0);
    const RandomStream eval_root = rs.split(2);
    parallel_for(bins, threads, [&](long bin) {
        RandomStream local = eval_root.split(static_cast<uint64_t>(bin));
        const int h = static_cast<int>(bin / per_hemi);
        const int a = static_cast<int>(bin % per_hemi) / n_phi, b = static_cast<int>(bin % per_hemi) % n_phi;
        double sum = 0, sum2 = 0;
        for (long k = 0; k < evals_per_bin; ++k) {
            const double c = (a + local.uniform()) / n_theta;
            const double phi = 2.0 * kPi * (b + local.uniform()) / n_phi;
            const double r = std::sqrt(std::max(0.0, 1.0 - c * c));
            const Direction d{r * std::cos(phi), r * std::sin(phi), h == 0 ? c : -c};
            const double v = eval_pt(BsdfQuery{omega_i, d, mat, conv, 1}, local).average() * c;
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / evals_per_bin;
        const double var = std::max(0.0, sum2 / evals_per_bin - mean * mean) / evals_per_bin;
        const double scale = static_cast<double>(n_walks) * bin_area;
        expected[bin] = scale * mean;
        variance[bin] = scale * scale * var;
    });
    out.chi = chi_square(observed, expected, variance);
    return out;
}

}  // namespace msbsdf::oracle
