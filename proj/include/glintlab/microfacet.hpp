// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/rng.hpp"
#include "glintlab/vec.hpp"

#include <string_view>

namespace glintlab {

enum class NdfKind { GGX, Beckmann };

std::string_view to_string(NdfKind kind);
NdfKind parse_ndf_kind(std::string_view name);

/// Isotropic microfacet distribution with roughness alpha in (0, 1].
struct MicrofacetModel {
    MicrofacetModel(NdfKind kind, double alpha);

    /// From perceptually linear roughness r = sqrt(alpha).
    static MicrofacetModel from_perceptual(NdfKind kind, double roughness);

    NdfKind kind;
    double alpha;
};

/// Reflectance at normal incidence per channel, each in [0, 1].
struct FresnelF0 {
    explicit FresnelF0(const Rgb& value);
    explicit FresnelF0(double grey) : FresnelF0(Rgb{grey, grey, grey}) {}

    Rgb value;
};

// Everything below works in a local frame unless a normal is passed in
// explicitly: the macro-surface normal is +z.

double ndf_eval(const MicrofacetModel& model, double cos_nh);

/// Smith Lambda for a direction at polar cosine `cos_theta`.
double smith_lambda(const MicrofacetModel& model, double cos_theta);

/// Height-correlated Smith masking-shadowing 1 / (1 + Lambda(v) + Lambda(l)).
double smith_g(const MicrofacetModel& model, double cos_nv, double cos_nl);

Rgb fresnel_schlick(const FresnelF0& f0, double cos_theta);

/// F G D / (4 (n.wo)(n.wi)). Zero when either direction is below the horizon.
Rgb brdf_eval(const MicrofacetModel& model, const FresnelF0& f0, const Vec3& wi, const Vec3& wo, const Vec3& n);

/// G D / (4 (n.wo)) in the local frame, i.e. f_r * (n.wi) with F = 1.
double brdf_cos_unit_fresnel(const MicrofacetModel& model, const Vec3& wi, const Vec3& wo);

/// D(h) / (4 (h.wi)), the integrand of the integrated NDF over light
/// directions, with h = halfway(wi, wo). Zero below the horizon.
double ndf_light_density(const MicrofacetModel& model, const Vec3& wi, const Vec3& wo);

/// Total microfacet area: closed form for GGX, quadratic fit in alpha^2 for
/// Beckmann (within 0.004 of the erfc form).
double total_microfacet_area(const MicrofacetModel& model);

/// Beckmann total area via the exact erfc expression.
double beckmann_total_area_exact(double alpha);

/// Directional albedo with F = 1, by quadrature over microfacet normals.
double fgd(const MicrofacetModel& model, double cos_nv);

/// Microfacet area whose mirror direction of the view stays above the horizon.
double d_pr(const MicrofacetModel& model, double cos_nv);

/// Microfacet normal distributed with density D(h) / D_H (solid angle).
Vec3 sample_ndf(const MicrofacetModel& model, Rng& rng);

/// Microfacet normal distributed with density D(h) (n.h).
Vec3 sample_ndf_cosine(const MicrofacetModel& model, double u1, double u2);

/// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
double erfcx(double x);

} // namespace glintlab
