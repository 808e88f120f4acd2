// SPDX-License-Identifier: Apache-2.0

#include "glintlab/scene.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace glintlab {

using nlohmann::json;

std::string_view to_string(RenderMode mode)
{
    switch (mode) {
    case RenderMode::SmoothLtc:
        return "smooth_ltc";
    case RenderMode::SmoothMc:
        return "smooth_mc";
    case RenderMode::Glint:
        return "glint";
    case RenderMode::GlintBaseline:
        return "glint_baseline";
    case RenderMode::Oracle:
        return "oracle";
    }
    return "?";
}

RenderMode parse_render_mode(std::string_view name)
{
    for (RenderMode m : {RenderMode::SmoothLtc, RenderMode::SmoothMc, RenderMode::Glint, RenderMode::GlintBaseline,
                         RenderMode::Oracle}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown render mode '" + std::string(name) + "'");
}

namespace {

const json& require(const json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object()) {
        throw SceneError(path, "expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw SceneError(path + "." + key, "missing required field");
    }
    return *it;
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number()) {
        throw SceneError(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw SceneError(path, "must be finite");
    }
    return v;
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback)
{
    const auto it = j.find(key);
    return it == j.end() ? fallback : number(*it, path + "." + key);
}

Vec3 vec3(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 3) {
        throw SceneError(path, "expected an array of 3 numbers");
    }
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

Rgb rgb(const json& j, const std::string& path)
{
    if (j.is_number()) {
        const double v = number(j, path);
        return {v, v, v};
    }
    const Vec3 v = vec3(j, path);
    if (v.x < 0.0 || v.y < 0.0 || v.z < 0.0) {
        throw SceneError(path, "must be nonnegative");
    }
    return {v.x, v.y, v.z};
}

std::string text(const json& j, const std::string& path)
{
    if (!j.is_string()) {
        throw SceneError(path, "expected a string");
    }
    return j.get<std::string>();
}

template <class F>
auto wrap(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const SceneError&) {
        throw;
    } catch (const std::exception& e) {
        throw SceneError(path, e.what());
    }
}

GlintSurface parse_surface(const json& j, PlaneSpec& plane)
{
    const std::string p = "surface";
    if (!j.is_object()) {
        throw SceneError(p, "expected an object");
    }
    const NdfKind kind = wrap(p + ".model", [&] { return parse_ndf_kind(text(require(j, "model", p), p + ".model")); });
    const double roughness = number(require(j, "roughness", p), p + ".roughness");
    const MicrofacetModel model =
        wrap(p + ".roughness", [&] { return MicrofacetModel::from_perceptual(kind, roughness); });
    const Rgb f0v = j.contains("f0") ? rgb(j["f0"], p + ".f0") : Rgb{1.0, 1.0, 1.0};
    const FresnelF0 f0 = wrap(p + ".f0", [&] { return FresnelF0(f0v); });
    const double density = number(require(j, "density", p), p + ".density");
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
            throw SceneError(p + ".seed", "expected a nonnegative integer");
        }
        seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("plane")) {
        const json& pj = j["plane"];
        const std::string pp = p + ".plane";
        if (!pj.is_object()) {
            throw SceneError(pp, "expected an object");
        }
        if (pj.contains("center")) {
            plane.center = vec3(pj["center"], pp + ".center");
        }
        plane.half_size = number_or(pj, "half_size", pp, plane.half_size);
        plane.uv_scale = number_or(pj, "uv_scale", pp, plane.uv_scale);
        if (!(plane.half_size > 0.0)) {
            throw SceneError(pp + ".half_size", "must be positive");
        }
        if (!(plane.uv_scale > 0.0)) {
            throw SceneError(pp + ".uv_scale", "must be positive");
        }
    }
    return wrap(p + ".density", [&] { return GlintSurface(model, f0, density, seed); });
}

CameraSpec parse_camera(const json& j)
{
    const std::string p = "camera";
    CameraSpec c;
    c.position = vec3(require(j, "position", p), p + ".position");
    c.look_at = vec3(require(j, "look_at", p), p + ".look_at");
    if (j.contains("up")) {
        c.up = vec3(j["up"], p + ".up");
    }
    c.fov_deg = number_or(j, "fov_deg", p, c.fov_deg);
    if (!(c.fov_deg > 0.0 && c.fov_deg < 180.0)) {
        throw SceneError(p + ".fov_deg", "must be in (0, 180)");
    }
    for (const char* key : {"width", "height"}) {
        const json& v = require(j, key, p);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > 65536) {
            throw SceneError(p + "." + key, "expected an integer in [1, 65536]");
        }
    }
    c.width = j["width"].get<int>();
    c.height = j["height"].get<int>();
    const Vec3 forward = c.look_at - c.position;
    if (!(length(forward) > 0.0)) {
        throw SceneError(p + ".look_at", "must differ from the position");
    }
    if (!(length(cross(forward, c.up)) > 1e-9 * length(forward) * length(c.up))) {
        throw SceneError(p + ".up", "must not be parallel to the viewing direction");
    }
    return c;
}

LightSpec parse_light(const json& j, const std::string& p)
{
    const std::string type = text(require(j, "type", p), p + ".type");
    LightSpec light;
    if (type == "quad") {
        const json& cj = require(j, "corners", p);
        if (!cj.is_array() || cj.size() != 4) {
            throw SceneError(p + ".corners", "expected 4 corner points");
        }
        QuadLight q;
        for (std::size_t i = 0; i < 4; ++i) {
            q.corners[i] = vec3(cj[i], p + ".corners[" + std::to_string(i) + "]");
        }
        q.radiance = rgb(require(j, "radiance", p), p + ".radiance");
        light = q;
    } else if (type == "directional") {
        DirectionalLight d;
        const Vec3 dir = vec3(require(j, "direction", p), p + ".direction");
        if (!(length(dir) > 0.0)) {
            throw SceneError(p + ".direction", "must be nonzero");
        }
        // Leave unit input untouched so that written scenes reparse exactly.
        d.direction = std::abs(length(dir) - 1.0) <= 1e-15 ? dir : normalize(dir);
        d.half_angle = radians(number(require(j, "half_angle_deg", p), p + ".half_angle_deg"));
        d.radiance = rgb(require(j, "radiance", p), p + ".radiance");
        light = d;
    } else if (type == "point") {
        PointLight pt;
        pt.position = vec3(require(j, "position", p), p + ".position");
        pt.radius = number(require(j, "radius", p), p + ".radius");
        pt.intensity = rgb(require(j, "intensity", p), p + ".intensity");
        light = pt;
    } else {
        throw SceneError(p + ".type", "unknown light type '" + type + "' (expected quad, directional or point)");
    }
    wrap(p, [&] {
        validate_light(light);
        return 0;
    });
    return light;
}

RenderSettings parse_render(const json& j)
{
    const std::string p = "render";
    RenderSettings r;
    if (!j.is_object()) {
        throw SceneError(p, "expected an object");
    }
    if (j.contains("mode")) {
        r.mode = wrap(p + ".mode", [&] { return parse_render_mode(text(j["mode"], p + ".mode")); });
    }
    r.baseline_R = number_or(j, "baseline_R", p, r.baseline_R);
    if (!(r.baseline_R >= 0.0 && r.baseline_R <= 1.0)) {
        throw SceneError(p + ".baseline_R", "must be in [0, 1]");
    }
    if (j.contains("spp")) {
        if (!j["spp"].is_number_integer() || j["spp"].get<std::int64_t>() < 1) {
            throw SceneError(p + ".spp", "expected a positive integer");
        }
        r.spp = j["spp"].get<int>();
    }
    r.exposure = number_or(j, "exposure", p, r.exposure);
    if (!(r.exposure > 0.0)) {
        throw SceneError(p + ".exposure", "must be positive");
    }
    for (auto [key, field] : {std::pair{"tonemap", &r.tonemap}, std::pair{"use_ndf_lobe", &r.use_ndf_lobe}}) {
        if (j.contains(key)) {
            if (!j[key].is_boolean()) {
                throw SceneError(p + "." + key, "expected a boolean");
            }
            *field = j[key].get<bool>();
        }
    }
    return r;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

} // namespace

Scene parse_scene(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SceneError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw SceneError("$", "expected a JSON object");
    }
    const json& version = require(root, "version", "$");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw SceneError("version", "unsupported scene version (expected 1)");
    }
    Scene scene;
    scene.surface = parse_surface(require(root, "surface", "$"), scene.plane);
    scene.camera = parse_camera(require(root, "camera", "$"));
    const json& lights = require(root, "lights", "$");
    if (!lights.is_array() || lights.empty()) {
        throw SceneError("lights", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < lights.size(); ++i) {
        scene.lights.push_back(parse_light(lights[i], "lights[" + std::to_string(i) + "]"));
    }
    if (root.contains("render")) {
        scene.render = parse_render(root["render"]);
    }
    return scene;
}

Scene load_scene(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SceneError("$", "cannot open scene file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str());
}

std::string scene_to_json(const Scene& s)
{
    json root;
    root["version"] = 1;
    root["surface"] = {
        {"model", std::string(to_string(s.surface.model.kind))},
        {"roughness", std::sqrt(s.surface.model.alpha)},
        {"f0", rgb_json(s.surface.f0.value)},
        {"density", s.surface.density},
        {"seed", s.surface.seed},
        {"plane",
         {{"center", vec_json(s.plane.center)}, {"half_size", s.plane.half_size}, {"uv_scale", s.plane.uv_scale}}},
    };
    root["camera"] = {
        {"position", vec_json(s.camera.position)}, {"look_at", vec_json(s.camera.look_at)},
        {"up", vec_json(s.camera.up)},             {"fov_deg", s.camera.fov_deg},
        {"width", s.camera.width},                 {"height", s.camera.height},
    };
    json lights = json::array();
    for (const LightSpec& l : s.lights) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, QuadLight>) {
                    json corners = json::array();
                    for (const Vec3& c : v.corners) {
                        corners.push_back(vec_json(c));
                    }
                    lights.push_back({{"type", "quad"}, {"corners", corners}, {"radiance", rgb_json(v.radiance)}});
                } else if constexpr (std::is_same_v<T, DirectionalLight>) {
                    lights.push_back({{"type", "directional"},
                                      {"direction", vec_json(v.direction)},
                                      {"half_angle_deg", degrees(v.half_angle)},
                                      {"radiance", rgb_json(v.radiance)}});
                } else {
                    lights.push_back({{"type", "point"},
                                      {"position", vec_json(v.position)},
                                      {"radius", v.radius},
                                      {"intensity", rgb_json(v.intensity)}});
                }
            },
            l);
    }
    root["lights"] = lights;
    root["render"] = {
        {"mode", std::string(to_string(s.render.mode))},
        {"baseline_R", s.render.baseline_R},
        {"spp", s.render.spp},
        {"exposure", s.render.exposure},
        {"tonemap", s.render.tonemap},
        {"use_ndf_lobe", s.render.use_ndf_lobe},
    };
    return root.dump(2);
}

Scene default_scene(double light_side, double elevation_deg, int width, int height)
{
    Scene s;
    const double e = radians(elevation_deg);
    const double dist = 3.0;
    s.camera.position = {0.0, -dist * std::cos(e), dist * std::sin(e)};
    s.camera.look_at = {0.0, 0.0, 0.0};
    s.camera.up = {0.0, 0.0, 1.0};
    s.camera.fov_deg = 40.0;
    s.camera.width = width;
    s.camera.height = height;
    s.plane.half_size = 4.0;
    // Light centred on the mirror direction of the image centre, facing down.
    const double cy = 1.0 / std::tan(e);
    const double h = 0.5 * light_side;
    QuadLight q;
    q.corners = {Vec3{-h, cy - h, 1.0}, Vec3{-h, cy + h, 1.0}, Vec3{h, cy + h, 1.0}, Vec3{h, cy - h, 1.0}};
    q.radiance = {1.0, 1.0, 1.0};
    s.lights.push_back(q);
    return s;
}

} // namespace glintlab
