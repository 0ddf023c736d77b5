// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "msbsdf/estimators.h"
#include "msbsdf/oracles.h"
#include "msbsdf/path.h"

using namespace msbsdf;

namespace {

Direction dir_deg(double theta, double phi) { return spherical_direction(theta * kPi / 180, phi * kPi / 180); }

Direction random_direction(RandomStream& rs) {
    const double z = 1.0 - 2.0 * rs.uniform();
    const double phi = 2.0 * kPi * rs.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

MaterialSpec furnace(double alpha) {
    return MaterialSpec::furnace_conductor(RoughnessProfile::isotropic(NdfFamily::GGX, alpha));
}

const EvalConventions kConsistent{VertexMode::CancellationConsistent, 10};
const EvalConventions kLiteral{VertexMode::Literal, 10};

// Isotropic GGX written out directly, for factor-by-factor checks.
double ggx_d(const Direction& m, double a) {
    if (m.z <= 0)
        return 0;
    const double c2 = m.z * m.z, t2 = (1 - c2) / c2;
    const double k = 1 + t2 / (a * a);
    return 1.0 / (kPi * a * a * c2 * c2 * k * k);
}
double ggx_lambda(const Direction& w, double a) {
    const double t2 = (1 - w.z * w.z) / (w.z * w.z);
    const double root = std::sqrt(1 + a * a * t2);
    return w.z > 0 ? (root - 1) / 2 : (-root - 1) / 2;
}

// Consistent three-vertex conductor path: d1 dips below the horizon, d2
// leaves upward.
LightPath three_bounce_path() {
    return LightPath({-dir_deg(40, 0), dir_deg(100, 180), dir_deg(50, 0), dir_deg(30, 90)});
}

}  // namespace

TEST(LightPath, ReverseInvolution) {
    const LightPath p({-dir_deg(40, 0), dir_deg(100, 180), dir_deg(50, 0)},
                      {Branch::Reflect, Branch::Refract});
    const LightPath r = reverse(p);
    EXPECT_EQ(r.dirs.size(), p.dirs.size());
    EXPECT_EQ(reverse(r), p);
    EXPECT_EQ(r.dirs.front(), -p.dirs.back());
    EXPECT_EQ(r.branches.front(), Branch::Refract);
}

TEST(LightPath, ReversedConductorPathServesSwappedQuery) {
    const LightPath p = three_bounce_path();
    const LightPath r = reverse(p);
    const Direction omega_i = dir_deg(40, 0), omega_o = dir_deg(30, 90);
    EXPECT_EQ(r.dirs.front(), -omega_o);
    EXPECT_EQ(r.dirs.back(), omega_i);
    EXPECT_GT(path_contribution(r, furnace(0.7), kConsistent).r, 0.0);
}

TEST(LightPath, BranchCountChecked) {
    EXPECT_THROW(LightPath({kNormal, kNormal}, {}), std::invalid_argument);
}

TEST(SegmentTerms, EndpointRules) {
    const auto mat = furnace(0.6);
    const LightPath p = three_bounce_path();
    EXPECT_EQ(exit_probability(p, 0, mat), 1.0);
    EXPECT_EQ(entry_masking(p, p.bounces(), mat), 1.0);
    EXPECT_EQ(segment_term(p, 0, mat), entry_masking(p, 0, mat));
    EXPECT_EQ(segment_term(p, p.bounces(), mat), exit_probability(p, p.bounces(), mat));
    // Interior downward direction: e = 1 and s = p.
    EXPECT_EQ(exit_probability(p, 1, mat), 1.0);
    EXPECT_NEAR(segment_term(p, 1, mat), entry_masking(p, 1, mat), 1e-15);
}

TEST(SegmentTerms, ConductorExitBelowHorizonIsZero) {
    const auto mat = furnace(0.6);
    const LightPath p({-dir_deg(40, 0), dir_deg(120, 180)});
    EXPECT_EQ(exit_probability(p, 1, mat), 0.0);
    EXPECT_EQ(path_contribution(p, mat, kConsistent), Rgb(0.0));
}

TEST(SegmentTerms, InteriorUpwardMatchesMicrofacetModule) {
    const auto mat = furnace(0.6);
    const LightPath p = three_bounce_path();
    const Direction d2 = p.dirs[2];
    const Direction h1 = *half_vector(-p.dirs[1], d2);
    EXPECT_NEAR(exit_probability(p, 2, mat), 1.0 - g1(d2, h1, mat.roughness), 1e-12);
    const Direction h2 = *half_vector(-d2, p.dirs[3]);
    EXPECT_NEAR(entry_masking(p, 2, mat), g1(-d2, h2, mat.roughness), 1e-12);
    EXPECT_NEAR(segment_term(p, 2, mat), exit_probability(p, 2, mat) * entry_masking(p, 2, mat), 1e-12);
}

TEST(SegmentTerms, EntryBackFacingIsZero) {
    const auto mat = furnace(0.6);
    // Vertex normal points away from the incoming direction: -d0.h <= 0.
    const LightPath p({dir_deg(30, 0) * -1.0, dir_deg(170, 0)});
    const auto h = half_vector(-p.dirs[0], p.dirs[1]);
    ASSERT_TRUE(h);
    if (dot(-p.dirs[0], *h) <= 0)
        EXPECT_EQ(entry_masking(p, 0, mat), 0.0);
    const LightPath q({-dir_deg(30, 0), dir_deg(60, 180)});
    EXPECT_GT(entry_masking(q, 0, mat), 0.0);
}

TEST(SegmentTerms, MatchG1OnRandomPaths) {
    const auto mat = furnace(0.8);
    RandomStream rs(31);
    int checked = 0;
    for (int i = 0; i < 20000; ++i) {
        const LightPath p({random_direction(rs), random_direction(rs), random_direction(rs)});
        const auto h = half_vector(-p.dirs[0], p.dirs[1]);
        if (!h)
            continue;
        EXPECT_NEAR(entry_masking(p, 0, mat), g1(-p.dirs[0], *h, mat.roughness), 1e-12);
        const double e = exit_probability(p, 1, mat), pm = entry_masking(p, 1, mat);
        if (pm < 1e6)
            EXPECT_NEAR(segment_term(p, 1, mat), e * pm, 1e-9 * std::max(1.0, e * pm));
        ++checked;
    }
    EXPECT_GT(checked, 19000);
}

TEST(VertexTerm, UnitFresnelIgnoresIor) {
    RoughnessProfile r = RoughnessProfile::isotropic(NdfFamily::GGX, 0.5);
    MaterialSpec a{r, ConductorIor{Rgb(0.2), Rgb(3.0)}, true};
    MaterialSpec b{r, ConductorIor{Rgb(1.7), Rgb(0.4)}, true};
    for (const auto& conv : {kConsistent, kLiteral}) {
        const Rgb va = vertex_term(-dir_deg(30, 0), dir_deg(50, 160), a, conv);
        const Rgb vb = vertex_term(-dir_deg(30, 0), dir_deg(50, 160), b, conv);
        EXPECT_EQ(va, vb);
    }
}

TEST(VertexTerm, NormalIncidenceGgx) {
    // F = 1, h = n: D(n) / 4 = 1 / (4 pi) in both modes.
    for (const auto& conv : {kConsistent, kLiteral})
        EXPECT_NEAR(vertex_term({0, 0, -1}, kNormal, furnace(1.0), conv).r, 0.0795774715459476679, 1e-15);
}

TEST(VertexTerm, DegenerateHalfVectorGivesZero) {
    EXPECT_EQ(vertex_term(kNormal, kNormal, furnace(0.5), kConsistent), Rgb(0.0));
}

TEST(PathContribution, SingleBounceReduction16x16) {
    const std::vector<MaterialSpec> mats = {
        furnace(0.5),
        MaterialSpec::conductor(RoughnessProfile(NdfFamily::Beckmann, 0.3, 0.8), kCopper),
        MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.4), 1.5),
    };
    for (const auto& mat : mats)
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b) {
                const Direction wi = dir_deg(2.5 + a * 5.5, 0);
                const Direction wo = dir_deg(2.5 + (b % 4) * 22.0, 30.0 + (b / 4) * 80.0);
                const Rgb f = path_contribution(LightPath({-wi, wo}), mat, kConsistent);
                const Rgb ref = eval_single_bounce(wi, wo, mat);
                for (int c = 0; c < 3; ++c)
                    EXPECT_NEAR(f[c], ref[c], 1e-9 * std::abs(ref[c]) + 1e-300);
            }
}

TEST(PathContribution, DielectricTransmissionReduction) {
    const auto mat = MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.4), 1.5);
    for (double ti : {10.0, 45.0, 70.0, 110.0, 160.0})
        for (double to : {100.0, 130.0, 175.0, 20.0, 60.0}) {
            const Direction wi = dir_deg(ti, 0), wo = dir_deg(to, 200);
            if ((wi.z > 0) == (wo.z > 0))
                continue;
            const Rgb f = path_contribution(LightPath({-wi, wo}, {Branch::Refract}), mat, kConsistent);
            const Rgb ref = eval_single_bounce(wi, wo, mat);
            EXPECT_NEAR(f.r, ref.r, 1e-9 * ref.r);
        }
}

TEST(PathContribution, HandComputedSingleBounce) {
    // GGX alpha 0.5, theta_i = theta_o = 45 degrees, same azimuth, F = 1.
    const Direction w = dir_deg(45, 0);
    const double value = path_contribution(LightPath({-w, w}), furnace(0.5), kConsistent).r;
    EXPECT_NEAR(value, 0.0908226661652879869, 1e-13);
    const double d = 0.203718327157626030, g = 0.944271909999158786;
    EXPECT_NEAR(value, d * g * g / (4 * 0.5), 1e-13);
}

TEST(PathContribution, ThreeBounceFactorByFactor) {
    const double a = 0.7;
    const auto mat = furnace(a);
    const LightPath p = three_bounce_path();
    const auto& d = p.dirs;
    const Direction h0 = normalize(-d[0] + d[1]);
    const Direction h1 = normalize(-d[1] + d[2]);
    const Direction h2 = normalize(-d[2] + d[3]);
    // s0 = G1(omega_i, h0); d1 is downward so s1 = p1 = 1/Lambda(d1) with
    // Lambda(d1) = -1 - Lambda(-d1); s2 = (1 - G1(d2)) G1(-d2); s3 = G1(d3).
    const double s0 = 1.0 / (1.0 + ggx_lambda(-d[0], a));
    const double s1 = std::abs(1.0 / (1.0 + ggx_lambda(-d[1], a)));
    const double s2 = (1.0 - 1.0 / (1.0 + ggx_lambda(d[2], a))) * std::abs(1.0 / (1.0 + ggx_lambda(-d[2], a)));
    const double s3 = 1.0 / (1.0 + ggx_lambda(d[3], a));
    const double v0 = ggx_d(h0, a) / (4 * std::abs(d[0].z) * std::abs(d[1].z));
    const double v1 = ggx_d(h1, a) / (4 * std::abs(d[1].z) * std::abs(d[2].z));
    const double v2 = ggx_d(h2, a) / (4 * std::abs(d[2].z) * std::abs(d[3].z));
    const double fold = std::abs(d[1].z) * std::abs(d[2].z);
    const double expected = s0 * v0 * s1 * v1 * s2 * v2 * s3 * fold;
    ASSERT_GT(dot(-d[0], h0), 0);
    ASSERT_GT(dot(-d[1], h1), 0);
    ASSERT_GT(dot(-d[2], h2), 0);
    EXPECT_NEAR(path_contribution(p, mat, kConsistent).r, expected, 1e-12 * expected);

    const double l0 = ggx_d(h0, a) / (4 * std::pow(dot(-d[0], h0), 2));
    const double l1 = ggx_d(h1, a) / (4 * std::pow(dot(-d[1], h1), 2));
    const double l2 = ggx_d(h2, a) / (4 * std::pow(dot(-d[2], h2), 2));
    const double literal = s0 * l0 * s1 * l1 * s2 * l2 * s3;
    EXPECT_NEAR(path_contribution(p, mat, kLiteral).r, literal, 1e-12 * literal);
}

TEST(PathContribution, ZeroWhenInteriorExitIsCertain) {
    const auto mat = furnace(0.5);
    // Interior direction along the normal: G1 = 1, so it cannot hit again.
    const LightPath p({-dir_deg(20, 0), kNormal, dir_deg(20, 180)});
    EXPECT_EQ(exit_probability(p, 1, mat), 0.0);
    EXPECT_EQ(path_contribution(p, mat, kConsistent), Rgb(0.0));
    EXPECT_EQ(continue_probability(kNormal, Side::Upper, mat), 0.0);
}

TEST(PathContribution, FuzzFiniteNonNegative) {
    const std::vector<MaterialSpec> mats = {
        furnace(0.3),
        MaterialSpec::conductor(RoughnessProfile(NdfFamily::Beckmann, 0.1, 1.0), kCopper),
        MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.8), 1.5),
    };
    RandomStream rs(77);
    for (int i = 0; i < 1000000; ++i) {
        const auto& mat = mats[i % mats.size()];
        const int k = 1 + static_cast<int>(rs.uniform() * 5);
        std::vector<Direction> dirs;
        std::vector<Branch> br;
        for (int j = 0; j <= k; ++j)
            dirs.push_back(random_direction(rs));
        for (int j = 0; j < k; ++j)
            br.push_back(mat.is_dielectric() && rs.uniform() < 0.5 ? Branch::Refract : Branch::Reflect);
        const LightPath p(dirs, br);
        const auto conv = i % 2 ? kConsistent : kLiteral;
        const Rgb f = path_contribution(p, mat, conv);
        ASSERT_TRUE(f.is_finite()) << i;
        ASSERT_GE(f.r, 0.0);
        ASSERT_GE(f.g, 0.0);
        ASSERT_GE(f.b, 0.0);
        const double pdf = path_pdf_forward(p, mat, conv);
        ASSERT_TRUE(std::isfinite(pdf));
        ASSERT_GE(pdf, 0.0);
    }
}

TEST(PathContribution, ModesDifferOnlyInVertexTerms) {
    const auto mat = MaterialSpec::conductor(RoughnessProfile::isotropic(NdfFamily::GGX, 0.6), kCopper);
    const LightPath p = three_bounce_path();
    Rgb v_cons(1.0), v_lit(1.0);
    for (int j = 0; j < p.bounces(); ++j) {
        v_cons *= vertex_term(p.dirs[j], p.dirs[j + 1], mat, kConsistent);
        v_lit *= vertex_term(p.dirs[j], p.dirs[j + 1], mat, kLiteral);
    }
    const double fold = std::abs(p.dirs[1].z) * std::abs(p.dirs[2].z);
    const Rgb segs_cons = path_contribution(p, mat, kConsistent) / fold;
    const Rgb segs_lit = path_contribution(p, mat, kLiteral);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(segs_cons[c] / v_cons[c], segs_lit[c] / v_lit[c], 1e-12 * segs_lit[c] / v_lit[c]);
}

TEST(PathContribution, ConductorPathsAreReciprocal) {
    const auto mat = MaterialSpec::conductor(RoughnessProfile(NdfFamily::GGX, 0.3, 0.9), kCopper);
    RandomStream rs(5);
    int nonzero = 0;
    for (int i = 0; i < 20000; ++i) {
        std::vector<Direction> dirs;
        const int k = 1 + i % 4;
        for (int j = 0; j <= k; ++j)
            dirs.push_back(random_direction(rs));
        // Both endpoints above the surface, as for any conductor query.
        dirs.front().z = -std::abs(dirs.front().z);
        dirs.back().z = std::abs(dirs.back().z);
        const LightPath p(dirs);
        const Rgb f = path_contribution(p, mat, kConsistent);
        const Rgb fr = path_contribution(reverse(p), mat, kConsistent);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(f[c], fr[c], 1e-9 * f[c]);
        nonzero += !f.is_black();
    }
    EXPECT_GT(nonzero, 100);
}

TEST(PathPdf, LengthTwoIsOne) {
    EXPECT_EQ(path_pdf_forward(LightPath({-dir_deg(30, 0), dir_deg(40, 10)}), furnace(0.5), kConsistent), 1.0);
}

TEST(PathPdf, SingleSampledDirectionUsesReflectionJacobian) {
    const auto mat = furnace(0.5);
    const Direction wi = dir_deg(35, 0);
    const Direction d1 = dir_deg(80, 150);
    const LightPath p({-wi, d1, dir_deg(20, 0)});
    const Direction h = normalize(wi + d1);
    const double expected = pdf_vndf(wi, h, mat.roughness) / (4 * std::abs(dot(h, d1))) *
                            continue_probability(d1, Side::Upper, mat);
    EXPECT_NEAR(path_pdf_forward(p, mat, kConsistent), expected, 1e-12 * expected);
}

TEST(PathPdf, ReflectionJacobianFiniteDifference) {
    // Solid angle of a small cone of micronormals mapped through reflection
    // shrinks by 4 (w.m).
    const Direction w = dir_deg(50, 0);
    const Direction m = dir_deg(25, 40);
    const Frame f = Frame::from_normal(m);
    const double eps = 1e-4;
    const Direction m1 = normalize(f.to_world({eps, 0, 1})), m2 = normalize(f.to_world({0, eps, 1}));
    const auto image = [&](const Direction& n) { return reflect(-w, n); };
    const Direction o = image(m), o1 = image(m1), o2 = image(m2);
    const double area_m = length(cross(m1 - m, m2 - m));
    const double area_o = length(cross(o1 - o, o2 - o));
    EXPECT_NEAR(area_m / area_o, 1.0 / (4.0 * dot(w, m)), 1e-3 / (4.0 * dot(w, m)));
}

TEST(PathPdf, RefractionJacobianFiniteDifference) {
    const auto mat = MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.5), 1.5);
    const Direction w = dir_deg(50, 0);
    const Direction m = dir_deg(15, 40);
    const Frame f = Frame::from_normal(m);
    const double eps = 1e-4;
    const Direction m1 = normalize(f.to_world({eps, 0, 1})), m2 = normalize(f.to_world({0, eps, 1}));
    const auto image = [&](const Direction& n) { return *refract(-w, n, 1.5); };
    const Direction o = image(m), o1 = image(m1), o2 = image(m2);
    const double ratio = length(cross(m1 - m, m2 - m)) / length(cross(o1 - o, o2 - o));
    const double denom = dot(w, m) + 1.5 * dot(o, m);
    const double jacobian = 1.5 * 1.5 * std::abs(dot(o, m)) / (denom * denom);
    EXPECT_NEAR(ratio, jacobian, 1e-3 * jacobian);
    // direction_pdf = pdf_vndf * jacobian * (1 - F).
    const double fr = fresnel_dielectric(dot(w, m), mat.dielectric_ior());
    EXPECT_NEAR(direction_pdf(-w, o, Side::Upper, Branch::Refract, mat),
                pdf_vndf(w, m, mat.roughness) * jacobian * (1 - fr), 1e-6 * jacobian);
}

TEST(PathPdf, IntegratesToAtMostOne) {
    const oracle::QuadratureGrid grid{128, 256};
    const auto nodes = grid.nodes();
    for (const auto& mat : {furnace(0.5), furnace(1.0),
                            MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.7), 1.5)}) {
        const Direction wi = dir_deg(40, 0);
        const Side s = entry_side(wi, mat);
        double step = 0, continued = 0;
        for (const auto& n : nodes) {
            for (Branch b : {Branch::Reflect, Branch::Refract}) {
                if (b == Branch::Refract && !mat.is_dielectric())
                    continue;
                const double pdf = direction_pdf(-wi, n.dir, s, b, mat);
                const Side next = b == Branch::Refract ? flip(s) : s;
                step += pdf * n.weight;
                continued += path_pdf_forward(LightPath({-wi, n.dir, kNormal}, {b, Branch::Reflect}), mat,
                                              kConsistent) *
                             n.weight;
                (void)next;
            }
        }
        EXPECT_NEAR(step, 1.0, 2e-3);
        EXPECT_LE(continued, 1.0 + 1e-3);
        EXPECT_GT(continued, 0.0);
    }
}

TEST(PathSides, RefractionFlipsMedium) {
    const auto mat = MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.5), 1.5);
    const LightPath p({-dir_deg(30, 0), dir_deg(150, 0), dir_deg(120, 90)}, {Branch::Refract, Branch::Reflect});
    const auto s = path_sides(p, mat);
    EXPECT_EQ(s[0], Side::Upper);
    EXPECT_EQ(s[1], Side::Lower);
    EXPECT_EQ(s[2], Side::Lower);
    EXPECT_EQ(entry_side(dir_deg(120, 0), mat), Side::Lower);
    EXPECT_EQ(entry_side(dir_deg(120, 0), furnace(0.5)), Side::Upper);
}

TEST(PathContribution, IndexMatchedRefractionIsDelta) {
    const auto mat = MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 0.5), 1.0);
    const LightPath p({-dir_deg(30, 0), dir_deg(140, 20)}, {Branch::Refract});
    EXPECT_EQ(path_contribution(p, mat, kConsistent), Rgb(0.0));
    RandomStream rs(3);
    const auto s = sample_direction(-dir_deg(30, 0), Side::Upper, mat, rs);
    ASSERT_TRUE(s);
    EXPECT_TRUE(s->delta);
    EXPECT_EQ(s->d, -dir_deg(30, 0));
}
