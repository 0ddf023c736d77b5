// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "msbsdf/fresnel.h"
#include "msbsdf/render.h"

namespace msbsdf {

double RoughnessGrid::lookup(double u, double v) const {
    const int x = std::clamp(static_cast<int>(u * width), 0, width - 1);
    const int y = std::clamp(static_cast<int>(v * height), 0, height - 1);
    return values[static_cast<size_t>(y) * width + x];
}

void SceneSpec::validate() const {
    if (lights.empty())
        throw std::invalid_argument("scene needs at least one light");
    if (camera.width < 16 || camera.height < 16)
        throw std::invalid_argument("resolution must be at least 16x16");
    if (!(camera.fov_deg > 0 && camera.fov_deg < 180))
        throw std::invalid_argument("fov must lie in (0, 180)");
    if (length(camera.look_at - camera.position) == 0)
        throw std::invalid_argument("camera position and look_at coincide");
    if (geometry == Geometry::Slab && !(slab_half_size > 0))
        throw std::invalid_argument("slab_half_size must be positive");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    for (std::string w; ss >> w;)
        out.push_back(w);
    return out;
}

double number(const std::string& w) {
    double v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size() || !std::isfinite(v))
        throw std::invalid_argument("not a number: '" + w + "'");
    return v;
}

std::vector<double> numbers(const std::vector<std::string>& ws, size_t first, size_t count) {
    if (ws.size() != first + count)
        throw std::invalid_argument(fmt::format("expected {} numbers", count));
    std::vector<double> out;
    for (size_t i = first; i < ws.size(); ++i)
        out.push_back(number(ws[i]));
    return out;
}

Vec3 vec3(const std::string& value) {
    const auto v = numbers(words(value), 0, 3);
    return {v[0], v[1], v[2]};
}

Rgb rgb_from(const std::vector<double>& v, size_t i) { return {v[i], v[i + 1], v[i + 2]}; }

Light parse_light(const std::string& value) {
    const auto ws = words(value);
    if (ws.empty())
        throw std::invalid_argument("empty light");
    Light l;
    if (ws[0] == "directional") {
        const auto v = numbers(ws, 1, 6);
        const Vec3 d{v[0], v[1], v[2]};
        if (length(d) == 0)
            throw std::invalid_argument("directional light needs a nonzero direction");
        l.kind = Light::Kind::Directional;
        l.directional = {normalize(d), rgb_from(v, 3)};
    } else if (ws[0] == "point") {
        const auto v = numbers(ws, 1, 6);
        l.kind = Light::Kind::Point;
        l.point = {{v[0], v[1], v[2]}, rgb_from(v, 3)};
    } else if (ws[0] == "env") {
        const auto v = numbers(ws, 1, 3);
        l.kind = Light::Kind::Env;
        l.env = {rgb_from(v, 0)};
    } else {
        throw std::invalid_argument("unknown light type '" + ws[0] + "'");
    }
    return l;
}

RoughnessGrid load_grid(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open roughness grid " + path);
    std::vector<double> vals;
    for (std::string line; std::getline(f, line);) {
        line = line.substr(0, line.find('#'));
        for (const auto& w : words(line))
            vals.push_back(number(w));
    }
    if (vals.size() < 2)
        throw std::invalid_argument("roughness grid needs 'width height' and values");
    RoughnessGrid g;
    g.width = static_cast<int>(vals[0]);
    g.height = static_cast<int>(vals[1]);
    if (g.width <= 0 || g.height <= 0 || vals[0] != g.width || vals[1] != g.height)
        throw std::invalid_argument("bad roughness grid dimensions");
    g.values.assign(vals.begin() + 2, vals.end());
    if (g.values.size() != static_cast<size_t>(g.width) * g.height)
        throw std::invalid_argument(fmt::format("roughness grid expects {} values, got {}",
                                                g.width * g.height, g.values.size()));
    for (double a : g.values)
        RoughnessProfile::isotropic(NdfFamily::GGX, a);  // range check
    return g;
}

}  // namespace

SceneSpec parse_scene(std::istream& in, const std::string& base_dir) {
    SceneSpec scene;
    std::string material = "furnace", ndf = "ggx";
    double alpha_x = 0.5, alpha_y = 0.5, eta = 1.5;
    std::optional<Rgb> ior_eta, ior_kappa;

    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        try {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (value.empty())
                throw std::invalid_argument("missing value for '" + key + "'");
            if (key == "geometry") {
                if (value == "sphere")
                    scene.geometry = Geometry::Sphere;
                else if (value == "slab")
                    scene.geometry = Geometry::Slab;
                else
                    throw std::invalid_argument("geometry must be sphere or slab");
            } else if (key == "slab_half_size") {
                scene.slab_half_size = number(value);
            } else if (key == "material") {
                if (value != "conductor" && value != "dielectric" && value != "furnace")
                    throw std::invalid_argument("material must be conductor, dielectric or furnace");
                material = value;
            } else if (key == "ndf") {
                if (value != "ggx" && value != "beckmann")
                    throw std::invalid_argument("ndf must be ggx or beckmann");
                ndf = value;
            } else if (key == "alpha") {
                alpha_x = alpha_y = number(value);
            } else if (key == "alpha_x") {
                alpha_x = number(value);
            } else if (key == "alpha_y") {
                alpha_y = number(value);
            } else if (key == "eta") {
                eta = number(value);
                if (!(eta > 0))
                    throw std::invalid_argument("eta must be positive");
            } else if (key == "conductor") {
                if (value != "copper")
                    throw std::invalid_argument("the only named conductor is copper");
            } else if (key == "ior_eta") {
                ior_eta = rgb_from(numbers(words(value), 0, 3), 0);
            } else if (key == "ior_kappa") {
                ior_kappa = rgb_from(numbers(words(value), 0, 3), 0);
            } else if (key == "roughness_grid") {
                std::filesystem::path p(value);
                if (p.is_relative())
                    p = std::filesystem::path(base_dir) / p;
                scene.roughness_grid = load_grid(p.string());
            } else if (key == "light") {
                scene.lights.push_back(parse_light(value));
            } else if (key == "camera_position") {
                scene.camera.position = vec3(value);
            } else if (key == "camera_look_at") {
                scene.camera.look_at = vec3(value);
            } else if (key == "camera_up") {
                scene.camera.up = vec3(value);
            } else if (key == "fov") {
                scene.camera.fov_deg = number(value);
            } else if (key == "resolution") {
                const auto v = numbers(words(value), 0, 2);
                scene.camera.width = static_cast<int>(v[0]);
                scene.camera.height = static_cast<int>(v[1]);
                if (v[0] != scene.camera.width || v[1] != scene.camera.height)
                    throw std::invalid_argument("resolution must be integral");
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(fmt::format("scene line {}: {}", line_no, e.what()));
        }
    }

    const RoughnessProfile rough(ndf == "ggx" ? NdfFamily::GGX : NdfFamily::Beckmann, alpha_x, alpha_y);
    if (material == "furnace") {
        scene.material = MaterialSpec::furnace_conductor(rough);
    } else if (material == "dielectric") {
        scene.material = MaterialSpec::dielectric(rough, eta);
    } else {
        ConductorIor ior = kCopper;
        if (ior_eta)
            ior.eta = *ior_eta;
        if (ior_kappa)
            ior.kappa = *ior_kappa;
        scene.material = MaterialSpec::conductor(rough, ior);
    }
    scene.validate();
    return scene;
}

SceneSpec load_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot open scene " + path);
    return parse_scene(f, std::filesystem::path(path).parent_path().string());
}

}  // namespace msbsdf
