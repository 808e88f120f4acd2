// SPDX-License-Identifier: Apache-2.0

#include "glintlab/ltc.hpp"
#include "glintlab/rng.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace glintlab;
using glintlab::testing::temp_file;
using glintlab::testing::small_table;

namespace {

Vec3 uniform_sphere(Rng& rng)
{
    const double z = 1.0 - 2.0 * rng.uniform();
    const double phi = 2.0 * kPi * rng.uniform();
    const double r = safe_sqrt(1.0 - z * z);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

// Octahedron faces covering the sphere.
std::vector<std::array<Vec3, 3>> octahedron()
{
    std::vector<std::array<Vec3, 3>> faces;
    for (double sx : {1.0, -1.0}) {
        for (double sy : {1.0, -1.0}) {
            for (double sz : {1.0, -1.0}) {
                faces.push_back({Vec3{sx, 0, 0}, Vec3{0, sy, 0}, Vec3{0, 0, sz}});
            }
        }
    }
    return faces;
}

const LtcParams kSkewed{0.35, 0.2, 0.5, -0.15};

} // namespace

TEST(Ltc, MatrixInverse)
{
    const Mat3 m = kSkewed.matrix();
    const Mat3 inv = m.inverse();
    const Vec3 v{0.3, -1.2, 2.0};
    const Vec3 back = inv * (m * v);
    EXPECT_NEAR(length(back - v), 0.0, 1e-14);
    EXPECT_NEAR(m.determinant(), 0.35 * 0.5 * 1.0 - 0.2 * 0.5 * -0.15, 1e-15);
    EXPECT_THROW(LtcLobe(Mat3{{1, 0, 0, 0, 0, 0, 0, 0, 1}}), std::invalid_argument);
}

TEST(Ltc, IdentityLobeIsClampedCosine)
{
    const LtcLobe lobe(LtcParams{});
    const Vec3 w = normalize({0.3, 0.4, 0.8});
    EXPECT_NEAR(ltc_eval(lobe, w), w.z / kPi, 1e-15);
    EXPECT_EQ(ltc_eval(lobe, {0.6, 0.0, -0.8}), 0.0);
}

TEST(Ltc, SkewedLobeNormalization)
{
    const LtcLobe lobe(kSkewed);
    double total = 0.0;
    for (const auto& f : octahedron()) {
        total += integrate_ltc_polygon(lobe, std::span<const Vec3>(f));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);

    Rng rng(3);
    const int n = 400000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = 4.0 * kPi * ltc_eval(lobe, uniform_sphere(rng));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_NEAR(mean, 1.0, 4.0 * se);
}

TEST(Ltc, SamplingMatchesPolygonIntegral)
{
    const LtcLobe lobe(kSkewed);
    const std::array<Vec3, 4> quad{Vec3{-0.2, -0.4, 1.0}, Vec3{0.9, -0.4, 1.0}, Vec3{0.9, 0.5, 0.6},
                                   Vec3{-0.2, 0.5, 0.6}};
    const auto poly = SphericalPolygon::from_points(quad, {0, 0, 0});
    const double expected = integrate_ltc_polygon(lobe, poly);
    Rng rng(8);
    const int n = 200000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        inside += contains(poly, ltc_sample(lobe, rng.uniform(), rng.uniform())) ? 1 : 0;
    }
    const double frac = static_cast<double>(inside) / n;
    EXPECT_NEAR(frac, expected, 4.0 * std::sqrt(expected * (1.0 - expected) / n));
}

TEST(Ltc, ClampedCosineAnalyticCases)
{
    const std::array<Vec3, 3> octant{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    EXPECT_NEAR(clamped_cosine_polygon(octant), 0.25, 1e-14);
    const std::array<Vec3, 3> below{Vec3{1, 0, -0.1}, Vec3{0, 1, -0.1}, Vec3{0, 0, -1}};
    EXPECT_EQ(clamped_cosine_polygon(below), 0.0);
    // A square at height 1 with half-width w subtends 4 atan-type terms:
    // (2/pi) * [w/sqrt(1+w^2) * atan(w/sqrt(1+w^2))] * 2 for the centred case.
    const double w = 0.7;
    const std::array<Vec3, 4> sq{Vec3{-w, -w, 1}, Vec3{w, -w, 1}, Vec3{w, w, 1}, Vec3{-w, w, 1}};
    const double s = w / std::sqrt(1.0 + w * w);
    EXPECT_NEAR(clamped_cosine_polygon(sq), 4.0 * s * std::atan(s) / kPi, 1e-13);
}

TEST(Ltc, HorizonClippingMatchesMonteCarlo)
{
    const std::array<Vec3, 4> quad{Vec3{-1.0, 0.5, -0.6}, Vec3{1.0, 0.5, -0.6}, Vec3{1.0, 1.5, 0.9},
                                   Vec3{-1.0, 1.5, 0.9}};
    const auto poly = SphericalPolygon::from_points(quad, {0, 0, 0});
    Rng rng(21);
    const int n = 400000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 w = uniform_sphere(rng);
        const double v = contains(poly, w) ? 4.0 * w.z * (w.z > 0.0 ? 1.0 : 0.0) : 0.0;
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_NEAR(clamped_cosine_polygon(quad), mean, 4.0 * se);
}

TEST(Ltc, ProjectiveInvariance)
{
    const LtcLobe lobe(kSkewed);
    const LtcLobe scaled(kSkewed.matrix() * 3.7);
    const std::array<Vec3, 4> quad{Vec3{-0.2, -0.4, 1.0}, Vec3{0.9, -0.4, 1.0}, Vec3{0.9, 0.5, 0.6},
                                   Vec3{-0.2, 0.5, 0.6}};
    std::array<Vec3, 4> far;
    for (std::size_t i = 0; i < 4; ++i) {
        far[i] = quad[i] * (i % 2 ? 11.0 : 0.4);
    }
    const double base = integrate_ltc_polygon(lobe, std::span<const Vec3>(quad));
    EXPECT_NEAR(integrate_ltc_polygon(scaled, std::span<const Vec3>(quad)), base, 1e-14);
    EXPECT_NEAR(integrate_ltc_polygon(lobe, std::span<const Vec3>(far)), base, 1e-14);
    EXPECT_NEAR(ltc_eval(scaled, normalize({0.2, 0.1, 0.9})), ltc_eval(lobe, normalize({0.2, 0.1, 0.9})), 1e-14);
}

TEST(Ltc, FitImprovesOnStart)
{
    const MicrofacetModel m(NdfKind::GGX, 0.3);
    const double cos_nv = 0.6;
    const FitResult fit = fit_ltc(m, cos_nv, LtcTarget::BRDF);
    const double start = ltc_fit_residual(m, cos_nv, LtcTarget::BRDF, LtcParams{0.3, 0.0, 0.3, 0.0});
    EXPECT_LT(fit.residual, start);
    EXPECT_LT(fit.residual, 0.2);
    EXPECT_GT(fit.iterations, 0);

    // Warm starting from the fit must not make it worse.
    const FitResult again = fit_ltc(m, cos_nv, LtcTarget::BRDF, {}, &fit.params);
    EXPECT_LE(again.residual, fit.residual * (1.0 + 1e-9));
}

TEST(Ltc, TableLookupAtNodesAndClamping)
{
    LtcTable t(NdfKind::GGX, 3);
    for (int iy = 0; iy < 3; ++iy) {
        for (int ix = 0; ix < 3; ++ix) {
            t.cell(ix, iy).fgd = static_cast<float>(10 * iy + ix);
        }
    }
    EXPECT_DOUBLE_EQ(t.lookup(t.node_alpha(1), t.node_cos(2)).fgd, 21.0);
    // Midway in sqrt-space between nodes 0 and 1 on both axes.
    const double x = 0.25;
    EXPECT_NEAR(t.lookup(x * x, x * x).fgd, 5.5, 1e-12);
    // The grid starts at zero; inputs below it clamp to the first node.
    EXPECT_DOUBLE_EQ(t.lookup(0.0, 0.0).fgd, 0.0);
    EXPECT_DOUBLE_EQ(t.lookup(-1.0, -1.0).fgd, 0.0);
    EXPECT_DOUBLE_EQ(t.lookup(1.0, 1.0).fgd, 22.0);
    EXPECT_DOUBLE_EQ(t.node_alpha(0), kTableMinAlpha);
    EXPECT_DOUBLE_EQ(t.node_cos(0), kTableMinCos);
    EXPECT_DOUBLE_EQ(t.node_alpha(2), 1.0);
}

TEST(Ltc, TableFileRoundTripAndErrors)
{
    const LtcTable& t = small_table();
    const auto path = temp_file("table.gltb");
    write_table(t, path);
    EXPECT_TRUE(read_table(path) == t);

    {
        std::ofstream bad(path, std::ios::binary | std::ios::trunc);
        bad << "NOPE and some more bytes";
    }
    EXPECT_THROW(read_table(path), std::runtime_error);

    write_table(t, path);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 7);
    EXPECT_THROW(read_table(path), std::runtime_error);

    write_table(t, path);
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        const char v = 9;
        f.write(&v, 1);
    }
    EXPECT_THROW(read_table(path), std::runtime_error);
    std::filesystem::remove(path);

    EXPECT_THROW(read_table(temp_file("does_not_exist.gltb")), std::runtime_error);
    EXPECT_THROW(write_table(t, "/proc/glintlab/none.gltb"), std::runtime_error);
}

TEST(Ltc, SerialAndParallelBakesAgree)
{
    const LtcTable a = bake_table(NdfKind::GGX, 4, Execution::Serial);
    const LtcTable b = bake_table(NdfKind::GGX, 4, Execution::Parallel);
    EXPECT_TRUE(a == b);
}

TEST(Ltc, BakedLobesAreNormalized)
{
    for (const LtcCell& c : small_table().cells()) {
        for (const auto& p : {c.brdf, c.ndf}) {
            const LtcLobe lobe(LtcParams{p[0], p[1], p[2], p[3]});
            double total = 0.0;
            for (const auto& f : octahedron()) {
                total += integrate_ltc_polygon(lobe, std::span<const Vec3>(f));
            }
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
        EXPECT_GT(c.fgd, 0.0f);
        EXPECT_GT(c.d_pr, 0.0f);
    }
}

TEST(Ltc, HemisphereLightGivesAlbedoAndReflectingArea)
{
    const LtcTable& t = small_table();
    const double big = 1e5;
    const std::array<Vec3, 4> sky{Vec3{-big, -big, 1}, Vec3{big, -big, 1}, Vec3{big, big, 1}, Vec3{-big, big, 1}};
    const double cos_nv = t.node_cos(5);
    const double alpha = t.node_alpha(4);
    const LtcCell& c = t.cell(4, 5);
    const FresnelF0 f0(1.0);
    // A lobe normalized over the sphere leaks a little below the horizon.
    auto upper = [](const std::array<float, 4>& p) {
        const LtcLobe lobe(LtcParams{p[0], p[1], p[2], p[3]});
        double sum = 0.0;
        for (const auto& f : octahedron()) {
            if (f[2].z > 0.0) {
                sum += integrate_ltc_polygon(lobe, std::span<const Vec3>(f));
            }
        }
        return sum;
    };
    const Rgb lo = smooth_radiance_area(t, f0, {2.0, 2.0, 2.0}, sky, cos_nv, alpha);
    EXPECT_GT(upper(c.brdf), 0.98);
    EXPECT_NEAR(lo.g, 2.0 * c.fgd * upper(c.brdf), 1e-4);
    // The integrated NDF reuses the BRDF lobe unless the NDF lobe is requested.
    EXPECT_NEAR(integrated_ndf_area(t, sky, cos_nv, alpha), c.d_pr * upper(c.brdf), 1e-4);
    EXPECT_NEAR(integrated_ndf_area(t, sky, cos_nv, alpha, true), c.d_pr * upper(c.ndf), 1e-4);
    const LtcAreaTerms terms = ltc_area_terms(t, f0, {2.0, 2.0, 2.0}, sky, cos_nv, alpha);
    EXPECT_DOUBLE_EQ(terms.radiance.g, lo.g);
    EXPECT_DOUBLE_EQ(terms.integrated_ndf, integrated_ndf_area(t, sky, cos_nv, alpha));
}
