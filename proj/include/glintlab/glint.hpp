// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/geom.hpp"
#include "glintlab/ltc.hpp"
#include "glintlab/microfacet.hpp"

#include <boost/container/static_vector.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace glintlab {

/// Material of a glinty surface. `density` is the number of microfacets per
/// unit UV area.
struct GlintSurface {
    GlintSurface(const MicrofacetModel& model, const FresnelF0& f0, double density, std::uint64_t seed);

    MicrofacetModel model;
    FresnelF0 f0;
    double density;
    std::uint64_t seed;
};

/// Pixel footprint in UV space: centre plus the UV change per pixel step in
/// x and y. The footprint is the parallelogram spanned by the derivatives.
struct FootprintSample {
    Vec2 uv;
    Vec2 duv_dx;
    Vec2 duv_dy;

    double area() const { return std::abs(cross(duv_dx, duv_dy)); }
};

/// Identifies one counting cell and light; hashed with the seed into an
/// independent random stream.
struct CountKey {
    std::int64_t cell_x = 0;
    std::int64_t cell_y = 0;
    int lod = 0;
    int light_id = 0;

    bool operator==(const CountKey&) const = default;
};

std::uint64_t hash_key(const CountKey& key, std::uint64_t seed);

struct QuadLight {
    std::array<Vec3, 4> corners;
    Rgb radiance;
};

/// Distant light widened to a cone of half-angle `half_angle` around
/// `direction` (pointing from the surface toward the light).
struct DirectionalLight {
    Vec3 direction;
    double half_angle;
    Rgb radiance;
};

/// Small sphere of the given radius; intensity in W/sr.
struct PointLight {
    Vec3 position;
    double radius;
    Rgb intensity;
};

using LightSpec = std::variant<QuadLight, DirectionalLight, PointLight>;

/// Validates the invariants of a light (planar convex quad, angle range,
/// positive radius). Throws std::invalid_argument.
void validate_light(const LightSpec& light);

/// A probability after clamping to [0, 1], with the raw value kept so the
/// clipped regime stays observable.
struct Probability {
    double value = 0.0;
    double unclamped = 0.0;
    bool clipped = false;
};

Probability make_probability(double unclamped);

/// Reflection probability for a polygonal light, local-frame vertices: the
/// LTC integrated NDF divided by the total microfacet area.
Probability probability_area(const LtcTable& table, const GlintSurface& surface, double cos_nv,
                             std::span<const Vec3> poly, bool use_ndf_lobe = false);

/// Same ratio from an externally computed integrated NDF (e.g. Monte Carlo).
Probability probability_from_integral(const MicrofacetModel& model, double integrated_ndf);

/// Reflection probability for a cap of half-angle gamma around wi, treating
/// D as constant over the cap. Local frame.
Probability probability_cap(const GlintSurface& surface, const Vec3& wo, const Vec3& wi, double gamma);

/// Prior heuristic p = R * D(h) / D(n), clamped to [0, 1].
double baseline_probability(double R, const MicrofacetModel& model, double cos_nh);

/// R for which the heuristic equals the cap probability at normal incidence.
double match_R(double gamma, const MicrofacetModel& model);

/// max(1, round(density * footprint area)).
std::uint64_t footprint_count(const GlintSurface& surface, const FootprintSample& fp);

/// Deterministic Binomial(n, p) draw from the stream of (key, seed).
std::uint64_t sample_binomial_count(std::uint64_t n, double p, const CountKey& key, std::uint64_t seed);

/// Same draw from a raw 64-bit stream id.
std::uint64_t sample_binomial_stream(std::uint64_t n, double p, std::uint64_t stream);

/// smooth_lo * k / (n p); black for p = 0.
Rgb glint_radiance(const Rgb& smooth_lo, std::uint64_t n, double p, std::uint64_t k);

/// Splits k successes of total probability p over sub-events with
/// probabilities sub_probs (sum p) by sequential conditional binomials.
/// Throws std::invalid_argument if the sub-probabilities do not sum to p
/// within 1e-6.
std::vector<std::uint64_t> split_count_multinomial(std::uint64_t k, std::span<const double> sub_probs, double p,
                                                   const CountKey& key, std::uint64_t seed);

/// Share of a footprint's microfacets that falls in one counting cell.
struct CellShare {
    std::int64_t cell_x;
    std::int64_t cell_y;
    std::uint64_t count;
};

/// Counting-cell layout of a footprint: level of detail `lod` (cell size
/// 2^lod in UV) and the microfacet count of each covered cell. The counts
/// sum to footprint_count and are split multinomially by overlap area.
struct FootprintCells {
    int lod = 0;
    std::uint64_t total = 0;
    boost::container::static_vector<CellShare, 4> cells;
};

FootprintCells footprint_cells(const GlintSurface& surface, const FootprintSample& fp);

/// Number of reflecting microfacets for one light: per-cell binomial draws
/// keyed by (cell, lod, light_id), summed. Marginally Binomial(total, p).
std::uint64_t count_reflecting(const FootprintCells& cells, double p, int light_id, std::uint64_t seed);

/// Per-cell counts for a subdivided light: each cell's draw for the whole
/// light (same stream as count_reflecting) is split over the patches. Entry
/// j is the total over cells for patch j; the entries sum to
/// count_reflecting(cells, p, light_id, seed).
std::vector<std::uint64_t> count_reflecting_split(const FootprintCells& cells, double p,
                                                  std::span<const double> sub_probs, int light_id,
                                                  std::uint64_t seed);

} // namespace glintlab
