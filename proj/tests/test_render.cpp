// SPDX-License-Identifier: Apache-2.0

#include "glintlab/experiments.hpp"
#include "glintlab/render.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <cstdlib>

using namespace glintlab;
using glintlab::testing::small_table;

namespace {

Scene tiny_scene(double light_side = 5.0, int size = 24)
{
    Scene s = default_scene(light_side, 45.0, size, size);
    s.surface = GlintSurface(MicrofacetModel(NdfKind::GGX, 0.25), FresnelF0(0.9), 2e5, 4);
    return s;
}

double quad_area(const std::array<Vec3, 4>& q)
{
    return 0.5 * length(cross(q[2] - q[0], q[3] - q[1]));
}

} // namespace

TEST(Render, CameraCentreRayHitsLookAt)
{
    CameraSpec cam;
    cam.position = {0, -3, 3};
    cam.look_at = {0.2, 0.1, 0};
    cam.width = 64;
    cam.height = 64;
    const Camera c(cam, PlaneSpec{{0, 0, 0}, 4.0, 1.0});
    // Pixel centres straddle the image centre by half a pixel.
    const auto a = c.trace(31, 31);
    const auto b = c.trace(32, 32);
    ASSERT_TRUE(a && b);
    const Vec3 mid = (a->position + b->position) * 0.5;
    EXPECT_NEAR(mid.x, 0.2, 2e-3);
    EXPECT_NEAR(mid.y, 0.1, 2e-3);
    EXPECT_NEAR(length(a->wo), 1.0, 1e-14);
    EXPECT_GT(a->wo.z, 0.0);
}

TEST(Render, FootprintMatchesFiniteDifferences)
{
    CameraSpec cam;
    cam.position = {0.3, -2.5, 1.5};
    cam.look_at = {0, 0.5, 0};
    cam.width = 200;
    cam.height = 150;
    const PlaneSpec plane{{0, 0, 0}, 10.0, 3.0};
    const Camera c(cam, plane);
    for (auto [x, y] : {std::pair{100, 75}, std::pair{30, 120}, std::pair{170, 45}}) {
        const auto h = c.trace(x, y);
        const auto xp = c.trace(x + 1, y);
        const auto xm = c.trace(x - 1, y);
        const auto yp = c.trace(x, y + 1);
        const auto ym = c.trace(x, y - 1);
        ASSERT_TRUE(h && xp && xm && yp && ym);
        const Vec2 fx = (xp->footprint.uv - xm->footprint.uv) * 0.5;
        const Vec2 fy = (yp->footprint.uv - ym->footprint.uv) * 0.5;
        const double scale = std::max(length(Vec3{fx.u, fx.v, 0}), length(Vec3{fy.u, fy.v, 0}));
        EXPECT_NEAR(h->footprint.duv_dx.u, fx.u, 1e-3 * scale);
        EXPECT_NEAR(h->footprint.duv_dx.v, fx.v, 1e-3 * scale);
        EXPECT_NEAR(h->footprint.duv_dy.u, fy.u, 1e-3 * scale);
        EXPECT_NEAR(h->footprint.duv_dy.v, fy.v, 1e-3 * scale);
        EXPECT_NEAR(h->footprint.uv.u, (h->position.x - plane.center.x) * 3.0, 1e-12);
    }
}

TEST(Render, RaysMissingThePlane)
{
    CameraSpec cam;
    cam.position = {0, 0, 1};
    cam.look_at = {0, 5, 2};
    cam.width = 8;
    cam.height = 8;
    const Camera c(cam, PlaneSpec{});
    EXPECT_FALSE(c.trace(4, 0).has_value());
}

TEST(Render, SubdivideQuad)
{
    const std::array<Vec3, 4> q{Vec3{0, 0, 1}, Vec3{2, 0, 1}, Vec3{2, 1, 1}, Vec3{0, 1, 1}};
    const auto one = subdivide_quad(q, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], q);
    const auto many = subdivide_quad(q, 4);
    ASSERT_EQ(many.size(), 16u);
    double area = 0.0;
    for (const auto& p : many) {
        area += quad_area(p);
    }
    EXPECT_NEAR(area, quad_area(q), 1e-14);
    EXPECT_EQ(many.front()[0], q[0]);
    EXPECT_EQ(many.back()[2], q[2]);
    EXPECT_THROW(subdivide_quad(q, 0), std::invalid_argument);
}

TEST(Render, SerialAndParallelImagesAreIdentical)
{
    const Scene s = tiny_scene();
    for (RenderMode m : {RenderMode::SmoothLtc, RenderMode::Glint, RenderMode::Oracle}) {
        Scene sm = s;
        sm.render.mode = m;
        sm.render.spp = 16;
        const Image a = render(sm, &small_table(), 3, Execution::Serial);
        const Image b = render(sm, &small_table(), 3, Execution::Parallel);
        EXPECT_TRUE(a == b) << to_string(m);
    }
}

TEST(Render, MissingOrMismatchedTable)
{
    Scene s = tiny_scene();
    s.render.mode = RenderMode::Glint;
    EXPECT_THROW(render(s, nullptr, 1), std::invalid_argument);
    s.surface = GlintSurface(MicrofacetModel(NdfKind::Beckmann, 0.25), FresnelF0(1.0), 1e4, 0);
    EXPECT_THROW(render(s, &small_table(), 1), std::invalid_argument);
    s.render.mode = RenderMode::SmoothMc;
    EXPECT_NO_THROW(render(s, nullptr, 1));
}

TEST(Render, SmoothLtcTracksMonteCarlo)
{
    Scene s = tiny_scene(5.0, 16);
    s.render.spp = 4096;
    const Image ltc = render(s, &small_table(), 1, options_for([&] {
                                 Scene t = s;
                                 t.render.mode = RenderMode::SmoothLtc;
                                 return t;
                             }()));
    s.render.mode = RenderMode::SmoothMc;
    const Image mc = render(s, nullptr, 1);
    const ImageComparison c = compare_images(ltc, mc, 0.05);
    EXPECT_GT(c.pixels, 100u);
    EXPECT_NEAR(c.mean_a / c.mean_ref, 1.0, 0.05);
}

TEST(Render, StatsAndClipping)
{
    Scene s = tiny_scene(5.0, 16);
    s.render.mode = RenderMode::Glint;
    s.surface = GlintSurface(MicrofacetModel::from_perceptual(NdfKind::GGX, 0.1), FresnelF0(1.0), 1e4, 0);
    s.lights = {DirectionalLight{normalize({0, 1, 1}), radians(5.0), {1, 1, 1}}};
    RenderStats stats;
    render(s, &small_table(), 1, Execution::Parallel, &stats);
    EXPECT_EQ(stats.shaded, 16u * 16u);
    EXPECT_GT(stats.clipped, 0u);
    EXPECT_GT(stats.max_unclamped_p, 1.0);
}

TEST(Render, CapLightsProduceFiniteNonnegativeRadiance)
{
    Scene s = tiny_scene(5.0, 16);
    s.lights = {DirectionalLight{normalize({0, 1, 1}), radians(2.0), {3, 3, 3}},
                PointLight{{0, 1, 1}, 0.05, {2, 2, 2}}};
    for (RenderMode m : {RenderMode::SmoothLtc, RenderMode::Glint, RenderMode::GlintBaseline}) {
        s.render.mode = m;
        const Image img = render(s, &small_table(), 2);
        double sum = 0.0;
        for (const Rgb& p : img.pixels()) {
            ASSERT_TRUE(std::isfinite(p.g) && p.g >= 0.0);
            sum += p.g;
        }
        EXPECT_GT(sum, 0.0) << to_string(m);
    }
}

TEST(Render, SplitCountsKeepWholeLightWithLtc)
{
    // With table probabilities the per-patch ratio Lo_j / p_j is shared, so
    // splitting the counts changes the image only by rounding.
    const Scene s = tiny_scene(5.0, 16);
    ShadeOptions whole;
    whole.split = 4;
    ShadeOptions split = whole;
    split.split_counts = true;
    const Image a = render(s, &small_table(), 9, whole);
    const Image b = render(s, &small_table(), 9, split);
    for (std::size_t i = 0; i < a.pixels().size(); ++i) {
        EXPECT_NEAR(a.pixels()[i].g, b.pixels()[i].g, 1e-9 * (1.0 + a.pixels()[i].g));
    }
}

TEST(Render, ThreadsFromEnvironment)
{
    const int before = omp_get_max_threads();
    ::setenv("GLINTLAB_THREADS", "3", 1);
    EXPECT_EQ(configure_threads_from_env(), 3);
    ::setenv("GLINTLAB_THREADS", "three", 1);
    EXPECT_THROW(configure_threads_from_env(), std::invalid_argument);
    ::setenv("GLINTLAB_THREADS", "0", 1);
    EXPECT_THROW(configure_threads_from_env(), std::invalid_argument);
    ::unsetenv("GLINTLAB_THREADS");
    omp_set_num_threads(before);
}
