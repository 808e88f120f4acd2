// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/glint.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glintlab {

/// Horizontal plane z = center.z with normal +z, covering the square of
/// side 2 * half_size around center. UV = (x - center.x, y - center.y) * uv_scale.
struct PlaneSpec {
    Vec3 center{0.0, 0.0, 0.0};
    double half_size = 1.0;
    double uv_scale = 1.0;
};

struct CameraSpec {
    Vec3 position{0.0, -2.0, 2.0};
    Vec3 look_at{0.0, 0.0, 0.0};
    Vec3 up{0.0, 0.0, 1.0};
    double fov_deg = 45.0;
    int width = 256;
    int height = 256;
};

enum class RenderMode { SmoothLtc, SmoothMc, Glint, GlintBaseline, Oracle };

std::string_view to_string(RenderMode mode);
RenderMode parse_render_mode(std::string_view name);

struct RenderSettings {
    RenderMode mode = RenderMode::Glint;
    double baseline_R = 1e-3;
    /// Monte-Carlo samples per pixel and light (smooth_mc and oracle).
    int spp = 256;
    double exposure = 1.0;
    bool tonemap = true;
    bool use_ndf_lobe = false;
};

struct Scene {
    GlintSurface surface{MicrofacetModel(NdfKind::GGX, 0.25), FresnelF0(1.0), 1e6, 0};
    PlaneSpec plane;
    CameraSpec camera;
    std::vector<LightSpec> lights;
    RenderSettings render;
};

/// Scene validation failure; the message starts with the JSON path of the
/// offending field.
class SceneError : public std::runtime_error {
public:
    SceneError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(path)
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Parses a version-1 JSON scene document.
Scene parse_scene(const std::string& json_text);
Scene load_scene(const std::filesystem::path& path);

/// Serializes a scene back to JSON (round-trips through parse_scene).
std::string scene_to_json(const Scene& scene);

/// Plane under a camera at `elevation_deg` above the horizon, lit by a
/// square quad light of the given side centred at height 1.
Scene default_scene(double light_side = 5.0, double elevation_deg = 45.0, int width = 256, int height = 256);

} // namespace glintlab
