// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "msbsdf/estimators.h"
#include "msbsdf/render.h"

using namespace msbsdf;

namespace {

SceneSpec scene_from(const std::string& text) {
    std::istringstream in(text);
    return parse_scene(in);
}

ImageBuffer random_image(int w, int h, uint64_t seed) {
    RandomStream rs(seed);
    ImageBuffer img(w, h);
    for (auto& v : img.data())
        v = static_cast<float>(rs.uniform() * 10.0);
    return img;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("msbsdf_test_" + name)).string();
}

const char* kFurnaceSphere = R"(
geometry = sphere
material = furnace
ndf = ggx
alpha = 0.5
light = env 1 1 1
camera_position = 0 -4 0
camera_look_at = 0 0 0
fov = 30
resolution = 16 16
)";

}  // namespace

TEST(Pfm, RoundTripIsBitwise) {
    const ImageBuffer img = random_image(7, 5, 1);
    EXPECT_EQ(decode_pfm(encode_pfm(img)), img);
    const std::string path = temp_path("roundtrip.pfm");
    write_pfm(img, path);
    EXPECT_EQ(read_pfm(path), img);
    std::filesystem::remove(path);
}

TEST(Pfm, OnePixelLayout) {
    ImageBuffer img(1, 1);
    img.set(0, 0, {1.0, 2.0, 3.0});
    const std::string bytes = encode_pfm(img);
    const std::string header = "PF\n1 1\n-1.0\n";
    ASSERT_EQ(bytes.size(), header.size() + 12);
    EXPECT_EQ(bytes.substr(0, header.size()), header);
    float first = 0;
    std::memcpy(&first, bytes.data() + header.size(), 4);
    EXPECT_EQ(first, 1.0f);
}

TEST(Pfm, RowsAreStoredBottomUp) {
    ImageBuffer img(1, 2);
    img.set(0, 0, Rgb(5.0));
    img.set(0, 1, Rgb(7.0));
    const std::string bytes = encode_pfm(img);
    float first = 0;
    std::memcpy(&first, bytes.data() + std::string("PF\n1 2\n-1.0\n").size(), 4);
    EXPECT_EQ(first, 7.0f);
}

TEST(Pfm, RejectsBigEndian) {
    std::string bytes = "PF\n1 1\n1.0\n" + std::string(12, '\0');
    try {
        decode_pfm(bytes);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("big-endian"), std::string::npos);
    }
}

TEST(Pfm, RejectsMalformedInput) {
    EXPECT_THROW(decode_pfm("P6\n1 1\n255\n"), std::runtime_error);
    EXPECT_THROW(decode_pfm("PF\nx 1\n-1.0\n"), std::runtime_error);
    EXPECT_THROW(decode_pfm("PF\n2 2\n-1.0\n" + std::string(12, '\0')), std::runtime_error);
    EXPECT_THROW(decode_pfm("PF\n1 1\n"), std::runtime_error);
    EXPECT_THROW(read_pfm(temp_path("does_not_exist.pfm")), std::runtime_error);
}

TEST(Mse, Basics) {
    const ImageBuffer a = random_image(8, 8, 2);
    EXPECT_EQ(mse(a, a), 0.0);
    ImageBuffer b = a;
    for (auto& v : b.data())
        v += 0.5f;
    EXPECT_NEAR(mse(a, b), 0.25, 1e-5);
    EXPECT_THROW(mse(a, ImageBuffer(8, 9)), std::invalid_argument);
}

TEST(Scene, ParsesKeys) {
    const SceneSpec s = scene_from(R"(
# comment line
geometry = slab   # trailing comment
slab_half_size = 2
material = dielectric
eta = 1.33
ndf = beckmann
alpha_x = 0.2
alpha_y = 0.6
light = directional 0 0 2 3 3 3
light = point 0 1 2 10 10 10
light = env 0.1 0.2 0.3
resolution = 32 16
)");
    EXPECT_EQ(s.geometry, Geometry::Slab);
    EXPECT_EQ(s.slab_half_size, 2.0);
    ASSERT_TRUE(s.material.is_dielectric());
    EXPECT_EQ(s.material.dielectric_ior().eta, 1.33);
    EXPECT_EQ(s.material.roughness.family(), NdfFamily::Beckmann);
    EXPECT_EQ(s.material.roughness.alpha_y(), 0.6);
    ASSERT_EQ(s.lights.size(), 3u);
    EXPECT_EQ(s.lights[0].directional.to_light, (Vec3{0, 0, 1}));
    EXPECT_EQ(s.lights[2].env.radiance, Rgb(0.1, 0.2, 0.3));
    EXPECT_EQ(s.camera.width, 32);
}

TEST(Scene, UnknownKeyFailsWithLineNumber) {
    try {
        scene_from("light = env 1 1 1\nalbedo = 3\n");
        FAIL();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos);
        EXPECT_NE(msg.find("albedo"), std::string::npos);
    }
}

TEST(Scene, RejectsInvalidScenes) {
    EXPECT_THROW(scene_from("geometry = sphere\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light = env 1 1 1\nresolution = 8 8\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light = env 1 1\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light = env 1 1 1\nalpha = 5\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light = env 1 1 1\nalpha = abc\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light = area 1 1 1\n"), std::invalid_argument);
    EXPECT_THROW(scene_from("light env 1 1 1\n"), std::invalid_argument);
}

TEST(Scene, RoughnessGridFile) {
    const std::string path = temp_path("grid.txt");
    {
        std::ofstream f(path);
        f << "2 1\n0.1 0.9\n";
    }
    const SceneSpec s = scene_from("light = env 1 1 1\nroughness_grid = " + path + "\n");
    ASSERT_TRUE(s.roughness_grid);
    EXPECT_EQ(s.roughness_grid->lookup(0.2, 0.5), 0.1);
    EXPECT_EQ(s.roughness_grid->lookup(0.7, 0.5), 0.9);
    {
        std::ofstream f(path);
        f << "2 2\n0.1 0.9\n";
    }
    EXPECT_THROW(scene_from("light = env 1 1 1\nroughness_grid = " + path + "\n"), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST(RunConfig, RejectsZeroSpp) {
    RunConfig cfg;
    cfg.spp = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_THROW(render(scene_from(kFurnaceSphere), cfg), std::invalid_argument);
}

TEST(Render, FurnaceSphereIsUniform) {
    RunConfig cfg;
    cfg.spp = 256;
    cfg.threads = 1;
    const ImageBuffer img = render(scene_from(kFurnaceSphere), cfg);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                EXPECT_NEAR(img.at(x, y)[c], 1.0, 0.02) << x << " " << y;
}

TEST(Render, IndexMatchedSlabIsInvisible) {
    const std::string base = R"(
geometry = slab
slab_half_size = 1
material = dielectric
eta = 1.0
alpha = 0.5
light = env 0.7 0.6 0.5
light = directional 0.3 -0.2 1 2 2 2
camera_position = 0 -3 2
camera_look_at = 0 0 0
resolution = 16 16
)";
    RunConfig cfg;
    cfg.spp = 4;
    const ImageBuffer with_slab = render(scene_from(base), cfg);
    const ImageBuffer empty = render(scene_from(base + "slab_half_size = 1e-9\n"), cfg);
    for (size_t i = 0; i < empty.data().size(); ++i)
        EXPECT_NEAR(with_slab.data()[i], empty.data()[i], 1e-4);
}

TEST(Render, ThreadCountDoesNotChangeImage) {
    SceneSpec s = scene_from(R"(
geometry = sphere
material = conductor
alpha_x = 0.3
alpha_y = 0.9
light = directional 1 -1 1 3 3 3
light = point 2 -2 0 20 20 20
light = env 0.2 0.2 0.2
resolution = 24 20
)");
    RunConfig cfg;
    cfg.spp = 3;
    cfg.threads = 1;
    const std::string a = encode_pfm(render(s, cfg));
    cfg.threads = 4;
    const std::string b = encode_pfm(render(s, cfg));
    cfg.threads = 16;
    const std::string c = encode_pfm(render(s, cfg));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    cfg.seed = 2;
    EXPECT_NE(a, encode_pfm(render(s, cfg)));
}

TEST(Render, OutputIsFiniteAndNonNegative) {
    RunConfig cfg;
    cfg.spp = 2;
    cfg.estimator = EstimatorKind::PT;
    const ImageBuffer img = render(scene_from(R"(
geometry = slab
material = dielectric
alpha = 0.8
light = directional 0 0.5 1 1 1 1
light = env 0.5 0.5 0.5
camera_position = 0 -2 -2
resolution = 16 16
)"),
                                   cfg);
    for (float v : img.data()) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0f);
    }
}

TEST(Lobe, FirstBounceSliceIsSingleScattering) {
    const auto mat = MaterialSpec::conductor(RoughnessProfile::isotropic(NdfFamily::GGX, 0.5), kCopper);
    RunConfig cfg;
    const Direction wi = spherical_direction(0.7, 0.0);
    const auto table = lobe_tabulate(wi, mat, cfg, oracle::QuadratureGrid{8, 16}, 4);
    const auto nodes = oracle::QuadratureGrid{8, 16}.nodes();
    ASSERT_EQ(table.rows.size(), nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double ref = eval_single_bounce(wi, nodes[i].dir, mat).average();
        EXPECT_NEAR(table.rows[i].rho1, ref, 1e-12 * ref + 1e-300);
        EXPECT_NEAR(table.rows[i].total,
                    table.rows[i].rho1 + table.rows[i].rho2 + table.rows[i].rho3plus, 1e-12 + 1e-12 * table.rows[i].total);
    }
}

TEST(Lobe, FurnaceEnergiesSumToOne) {
    RunConfig cfg;
    const auto mat = MaterialSpec::dielectric(RoughnessProfile::isotropic(NdfFamily::GGX, 1.0), 1.5);
    const auto table = lobe_tabulate(spherical_direction(0.5, 0.0), mat, cfg, oracle::QuadratureGrid{32, 64}, 64);
    EXPECT_NEAR(table.reflected + table.transmitted, 1.0, 0.01);
    EXPECT_GT(table.transmitted, 0.5);
}

TEST(Lobe, SmoothCopperIsMostlySingleScattering) {
    // Regression baseline from running the tool: at alpha = 0.1 and normal
    // incidence the second and later bounces carry under 5% of the energy.
    RunConfig cfg;
    const auto mat = MaterialSpec::conductor(RoughnessProfile::isotropic(NdfFamily::GGX, 0.1), kCopper);
    const auto table = lobe_tabulate(kNormal, mat, cfg, oracle::QuadratureGrid{64, 32}, 16);
    double multi = 0, total = 0;
    for (const auto& r : table.rows) {
        const double w = r.weight * std::max(0.0, std::cos(r.theta_deg * kPi / 180));
        multi += (r.rho2 + r.rho3plus) * w;
        total += r.total * w;
    }
    EXPECT_LT(multi / total, 0.05);
}

TEST(Lobe, CsvHasFixedColumns) {
    LobeTable t;
    t.rows.push_back({10, 20, 0.5, 0.1, 0.2, 0.3, 0.6});
    const std::string csv = lobe_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "theta_o_deg,phi_o_deg,weight,rho_1,rho_2,rho_3plus,rho_total");
    EXPECT_NE(csv.find("10.000000,20.000000,0.5,0.1,0.2,0.3,0.6"), std::string::npos);
}
