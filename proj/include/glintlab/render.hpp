// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/image.hpp"
#include "glintlab/ltc.hpp"
#include "glintlab/scene.hpp"

#include <optional>

namespace glintlab {

/// Primary ray of one pixel hitting the plane.
struct PlaneHit {
    Vec3 position;
    Vec3 wo;               ///< unit direction toward the camera
    FootprintSample footprint;
};

/// Pinhole camera with analytic ray differentials against the plane.
class Camera {
public:
    Camera(const CameraSpec& spec, const PlaneSpec& plane);

    /// Hit for the centre of pixel (x, y); empty if the ray misses the plane.
    std::optional<PlaneHit> trace(int x, int y) const;

private:
    CameraSpec spec_;
    PlaneSpec plane_;
    Vec3 forward_;
    Vec3 right_;
    Vec3 up_;
    double step_x_;
    double step_y_;
};

/// How each factor of the glint estimate is obtained.
enum class Estimator {
    Ltc,         ///< table lookups and analytic polygon integrals
    MonteCarlo,  ///< per-pixel Monte-Carlo reference
    Stratified,  ///< deterministic midpoint quadrature over light patches
};

struct ShadeOptions {
    Estimator lo = Estimator::Ltc;
    Estimator p = Estimator::Ltc;
    bool glint = true;             ///< false: smooth radiance only
    bool baseline = false;         ///< use R * D(h) / D(n) for p
    double baseline_R = 1e-3;
    bool use_ndf_lobe = false;
    std::uint64_t mc_samples = 256;
    /// Quad lights are treated as split x split patches. Stratified values
    /// are always sums over patches; with split_counts each patch also gets
    /// its own multinomial share of the count.
    int split = 1;
    bool split_counts = false;
    int stratified_grid = 64;      ///< quadrature points per side, whole light
    /// Multiplies the footprint microfacet count (convergence strips).
    double density_scale = 1.0;
};

/// Options equivalent to the scene's render mode.
ShadeOptions options_for(const Scene& scene);

/// Statistics gathered while rendering.
struct RenderStats {
    std::uint64_t shaded = 0;       ///< pixels that hit the plane
    std::uint64_t clipped = 0;      ///< light evaluations with p > 1 before clamping
    double max_unclamped_p = 0.0;
};

/// Renders the scene. `table` is required whenever an LTC estimator is used.
/// Output depends only on (scene, table, seed, options): rows are shaded
/// independently and the parallel and serial modes give identical images.
Image render(const Scene& scene, const LtcTable* table, std::uint64_t seed, const ShadeOptions& options,
             Execution exec = Execution::Parallel, RenderStats* stats = nullptr);

Image render(const Scene& scene, const LtcTable* table, std::uint64_t seed, Execution exec = Execution::Parallel,
             RenderStats* stats = nullptr);

/// Splits a convex quad into n x n bilinear patches; n = 1 returns the quad.
std::vector<std::array<Vec3, 4>> subdivide_quad(const std::array<Vec3, 4>& corners, int n);

/// Applies GLINTLAB_THREADS (if set and positive) to the OpenMP runtime.
/// Returns the thread count in effect. Throws on malformed values.
int configure_threads_from_env();

} // namespace glintlab
