// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/geom.hpp"
#include "glintlab/ltc.hpp"
#include "glintlab/microfacet.hpp"
#include "glintlab/rng.hpp"

#include <array>
#include <cstdint>

namespace glintlab {

/// Monte-Carlo estimate of a scalar with its standard error.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t count = 0;
};

struct McEstimateRgb {
    Rgb mean;
    Rgb std_error;
    std::uint64_t count = 0;
};

/// Planar convex quad in the local shading frame (shading point at the
/// origin, normal +z).
using LocalQuad = std::array<Vec3, 4>;

/// Estimates L * integral over the quad of f_r(wi, wo) cos(theta_i) dwi by
/// sampling points uniformly by area. Deterministic in `seed`; the parallel
/// and serial modes return identical values.
McEstimateRgb mc_radiance_area(const MicrofacetModel& model, const FresnelF0& f0, const Rgb& radiance,
                               const LocalQuad& quad, const Vec3& wo, std::uint64_t n_samples, std::uint64_t seed,
                               Execution exec = Execution::Parallel);

/// Estimates the integral over the quad of D(h) / (4 h.wi) dwi.
McEstimate mc_integrated_ndf(const MicrofacetModel& model, const LocalQuad& quad, const Vec3& wo,
                             std::uint64_t n_samples, std::uint64_t seed, Execution exec = Execution::Parallel);

/// Draws n microfacet normals with density D / D_H and counts those that
/// mirror wo into the polygon above the horizon.
std::uint64_t discrete_oracle_count(const MicrofacetModel& model, std::uint64_t n, const SphericalPolygon& poly,
                                    const Vec3& wo, Rng& rng);

/// Parallel form of discrete_oracle_count over fixed-size batches, each with
/// its own substream of `seed`. Returns the total count over n draws.
std::uint64_t discrete_oracle_count(const MicrofacetModel& model, std::uint64_t n, const SphericalPolygon& poly,
                                    const Vec3& wo, std::uint64_t seed, Execution exec = Execution::Parallel);

/// Averages (D_H / n) * (number of n sampled normals inside the cap) over
/// `trials` independent discrete surfaces; D_H is the exact total area.
McEstimate expected_discrete_ndf_cap(const MicrofacetModel& model, std::uint64_t n, const SphericalCap& cap,
                                     std::uint64_t trials, std::uint64_t seed, Execution exec = Execution::Parallel);

/// Exact total microfacet area (the erfc form for Beckmann).
double exact_total_area(const MicrofacetModel& model);

/// Deterministic stratified quadrature of the two quad integrals above with
/// grid x grid points per triangle half; used where noise-free values are
/// needed (subdivision experiments).
Rgb quad_radiance_stratified(const MicrofacetModel& model, const FresnelF0& f0, const Rgb& radiance,
                             const LocalQuad& quad, const Vec3& wo, int grid);
double quad_ndf_stratified(const MicrofacetModel& model, const LocalQuad& quad, const Vec3& wo, int grid);

} // namespace glintlab
