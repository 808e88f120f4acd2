// SPDX-License-Identifier: Apache-2.0

#include "glintlab/microfacet.hpp"
#include "glintlab/quadrature.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>

using namespace glintlab;

namespace {

// Hemispherical integrals of D, evaluated independently with 30-digit
// adaptive quadrature over the polar angle.
struct TotalAreaCase {
    NdfKind kind;
    double alpha;
    double expected;
};

constexpr TotalAreaCase kTotalArea[] = {
    {NdfKind::GGX, 0.01, 1.0005298557300099},      {NdfKind::GGX, 0.1, 1.0300830214985482},
    {NdfKind::GGX, 0.25, 1.1331942900629925},      {NdfKind::GGX, 0.5, 1.3801729981504732},
    {NdfKind::GGX, 1.0, 2.0},                      {NdfKind::Beckmann, 0.01, 1.0000499975003749},
    {NdfKind::Beckmann, 0.1, 1.0049753659391223},  {NdfKind::Beckmann, 0.25, 1.0303531520299384},
    {NdfKind::Beckmann, 0.5, 1.1131692624952936},  {NdfKind::Beckmann, 1.0, 1.3789360780706561},
};

// FGD (F = 1) and D_PR, integrated over light directions with nested
// adaptive quadrature in spherical coordinates.
struct AlbedoCase {
    NdfKind kind;
    double alpha;
    double cos_nv;
    double fgd;
    double d_pr;
};

constexpr AlbedoCase kAlbedo[] = {
    {NdfKind::GGX, 0.25, 0.5, 0.8572634355815688, 0.8968381276317943},
    {NdfKind::GGX, 0.5, 0.9, 0.6839614542394434, 0.8749545345143737},
    {NdfKind::GGX, 0.81, 0.2, 0.6973867636597354, 0.7823511993020233},
    {NdfKind::Beckmann, 0.5, 0.5, 0.8693602537165628, 0.8157236481987358},
    {NdfKind::Beckmann, 0.25, 0.8, 0.9948548940133106, 1.0267729755123087},
};

double projected_area(const MicrofacetModel& m)
{
    auto f = [&](double t) { return 2.0 * kPi * ndf_eval(m, std::cos(t)) * std::cos(t) * std::sin(t); };
    return quad::adaptive_split(f, 0.0, kPi / 2, {std::atan(m.alpha), std::atan(8.0 * m.alpha)}, 1e-12);
}

} // namespace

TEST(Microfacet, NamesRoundTrip)
{
    EXPECT_EQ(parse_ndf_kind("ggx"), NdfKind::GGX);
    EXPECT_EQ(parse_ndf_kind("beckmann"), NdfKind::Beckmann);
    EXPECT_EQ(to_string(NdfKind::Beckmann), "beckmann");
    EXPECT_THROW(parse_ndf_kind("phong"), std::invalid_argument);
}

TEST(Microfacet, ParameterValidation)
{
    EXPECT_THROW(MicrofacetModel(NdfKind::GGX, 0.0), std::domain_error);
    EXPECT_THROW(MicrofacetModel(NdfKind::GGX, 1.5), std::domain_error);
    EXPECT_THROW(FresnelF0(Rgb{1.2, 0.5, 0.5}), std::domain_error);
    EXPECT_DOUBLE_EQ(MicrofacetModel::from_perceptual(NdfKind::GGX, 0.5).alpha, 0.25);
}

TEST(Microfacet, ProjectedAreaIsOne)
{
    for (NdfKind k : {NdfKind::GGX, NdfKind::Beckmann}) {
        for (double a : {0.01, 0.1, 0.5, 1.0}) {
            EXPECT_NEAR(projected_area(MicrofacetModel(k, a)), 1.0, 1e-8) << to_string(k) << " " << a;
        }
    }
}

TEST(Microfacet, TotalAreaMatchesOracle)
{
    for (const auto& c : kTotalArea) {
        const MicrofacetModel m(c.kind, c.alpha);
        const double exact =
            c.kind == NdfKind::GGX ? total_microfacet_area(m) : beckmann_total_area_exact(c.alpha);
        EXPECT_NEAR(exact, c.expected, 1e-12 * c.expected) << to_string(c.kind) << " " << c.alpha;
    }
    EXPECT_EQ(total_microfacet_area(MicrofacetModel(NdfKind::GGX, 1.0)), 2.0);
}

TEST(Microfacet, GgxTotalAreaNearOneIsSmooth)
{
    // The series branch and the closed form must join without a jump.
    const double a = 1.0 - 4e-9;
    const double b = 1.0 - 6e-9;
    EXPECT_NEAR(total_microfacet_area(MicrofacetModel(NdfKind::GGX, a)),
                total_microfacet_area(MicrofacetModel(NdfKind::GGX, b)), 1e-8);
}

TEST(Microfacet, BeckmannPolynomialIsClose)
{
    EXPECT_NEAR(total_microfacet_area(MicrofacetModel(NdfKind::Beckmann, 1.0)), 1.375, 1e-15);
    EXPECT_NEAR(beckmann_total_area_exact(1.0), 1.37894, 5e-6);
    // 1 + 0.466 * 0.25 - 0.091 * 0.0625 at alpha = 0.5.
    EXPECT_NEAR(total_microfacet_area(MicrofacetModel(NdfKind::Beckmann, 0.5)), 1.1108125, 1e-15);
    for (int i = 1; i <= 100; ++i) {
        const double a = 0.01 * i;
        EXPECT_NEAR(total_microfacet_area(MicrofacetModel(NdfKind::Beckmann, a)), beckmann_total_area_exact(a), 0.004);
    }
}

TEST(Microfacet, ErfcxAgreesWithErfc)
{
    for (double x : {0.0, 0.5, 3.0, 10.0, 24.9}) {
        EXPECT_NEAR(erfcx(x), std::exp(x * x) * boost::math::erfc(x), 1e-13 * erfcx(x));
    }
    // Continuity across the asymptotic branch.
    EXPECT_NEAR(erfcx(25.0 - 1e-9), erfcx(25.0), 1e-12);
}

TEST(Microfacet, SmithAndFresnel)
{
    const MicrofacetModel m(NdfKind::GGX, 0.3);
    EXPECT_DOUBLE_EQ(smith_g(m, 1.0, 1.0), 1.0);
    EXPECT_LT(smith_g(m, 0.1, 0.9), 1.0);
    EXPECT_GT(smith_g(m, 0.1, 0.9), 0.0);
    EXPECT_EQ(smith_g(m, -0.1, 0.9), 0.0);
    EXPECT_DOUBLE_EQ(smith_g(m, 0.3, 0.7), smith_g(m, 0.7, 0.3));
    const FresnelF0 f0(Rgb{0.04, 0.5, 1.0});
    EXPECT_EQ(fresnel_schlick(f0, 1.0), f0.value);
    EXPECT_EQ(fresnel_schlick(f0, 0.0), (Rgb{1.0, 1.0, 1.0}));
}

TEST(Microfacet, BrdfIsReciprocalAndZeroBelowHorizon)
{
    const MicrofacetModel m(NdfKind::Beckmann, 0.4);
    const FresnelF0 f0(0.5);
    const Vec3 n{0, 0, 1};
    const Vec3 a = normalize({0.3, 0.2, 0.9});
    const Vec3 b = normalize({-0.5, 0.1, 0.6});
    EXPECT_NEAR(brdf_eval(m, f0, a, b, n).r, brdf_eval(m, f0, b, a, n).r, 1e-14);
    EXPECT_TRUE(brdf_eval(m, f0, a, {0.3, 0.0, -0.9}, n).is_black());
}

TEST(Microfacet, AlbedoAndReflectingAreaMatchOracle)
{
    for (const auto& c : kAlbedo) {
        const MicrofacetModel m(c.kind, c.alpha);
        EXPECT_NEAR(fgd(m, c.cos_nv), c.fgd, 1e-6) << to_string(c.kind) << " " << c.alpha << " " << c.cos_nv;
        EXPECT_NEAR(d_pr(m, c.cos_nv), c.d_pr, 1e-6) << to_string(c.kind) << " " << c.alpha << " " << c.cos_nv;
    }
}

TEST(Microfacet, ReflectingAreaAtNormalIncidenceIsInnerCone)
{
    // Head-on, a normal reflects above the horizon iff it lies within 45 degrees of n.
    for (NdfKind k : {NdfKind::GGX, NdfKind::Beckmann}) {
        const MicrofacetModel m(k, 0.3);
        auto f = [&](double t) { return 2.0 * kPi * ndf_eval(m, std::cos(t)) * std::sin(t); };
        const double cone = quad::adaptive(f, 0.0, kPi / 4, 1e-13);
        EXPECT_NEAR(d_pr(m, 1.0), cone, 1e-7) << to_string(k);
        EXPECT_LT(d_pr(m, 1.0), k == NdfKind::GGX ? total_microfacet_area(m) : beckmann_total_area_exact(0.3));
    }
}

TEST(Microfacet, NdfSamplingMatchesDensity)
{
    // Fraction of samples inside a polar cone vs the quadrature of D / D_H.
    for (NdfKind k : {NdfKind::GGX, NdfKind::Beckmann}) {
        const MicrofacetModel m(k, 0.4);
        const double dh = k == NdfKind::GGX ? total_microfacet_area(m) : beckmann_total_area_exact(m.alpha);
        const double cone = 0.5;
        auto f = [&](double t) { return 2.0 * kPi * ndf_eval(m, std::cos(t)) * std::sin(t); };
        const double expected = quad::adaptive(f, 0.0, cone, 1e-12) / dh;
        Rng rng(99);
        const int n = 200000;
        int inside = 0;
        for (int i = 0; i < n; ++i) {
            const Vec3 h = sample_ndf(m, rng);
            ASSERT_NEAR(length(h), 1.0, 1e-12);
            ASSERT_GE(h.z, 0.0);
            inside += h.z >= std::cos(cone) ? 1 : 0;
        }
        const double frac = static_cast<double>(inside) / n;
        EXPECT_NEAR(frac, expected, 4.0 * std::sqrt(expected * (1.0 - expected) / n)) << to_string(k);
    }
}

TEST(Microfacet, CosineSamplingMean)
{
    // E[h.z] under D(h)(n.h) is the integral of D cos^2.
    const MicrofacetModel m(NdfKind::GGX, 0.5);
    auto f = [&](double t) {
        const double c = std::cos(t);
        return 2.0 * kPi * ndf_eval(m, c) * c * c * std::sin(t);
    };
    const double expected = quad::adaptive(f, 0.0, kPi / 2, 1e-12);
    Rng rng(5);
    const int n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = sample_ndf_cosine(m, rng.uniform(), rng.uniform()).z;
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_NEAR(mean, expected, 4.0 * se);
}
