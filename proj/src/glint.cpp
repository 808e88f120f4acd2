// SPDX-License-Identifier: Apache-2.0

#include "glintlab/glint.hpp"

#include "glintlab/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace glintlab {

GlintSurface::GlintSurface(const MicrofacetModel& model_, const FresnelF0& f0_, double density_,
                           std::uint64_t seed_)
    : model(model_), f0(f0_), density(density_), seed(seed_)
{
    if (!(density > 0.0) || !std::isfinite(density)) {
        throw std::invalid_argument("microfacet density must be positive");
    }
}

std::uint64_t hash_key(const CountKey& key, std::uint64_t seed)
{
    std::uint64_t h = mix64(seed);
    h = hash_combine(h, static_cast<std::uint64_t>(key.cell_x));
    h = hash_combine(h, static_cast<std::uint64_t>(key.cell_y));
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(key.lod)));
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(key.light_id)));
    return h;
}

namespace {

void validate_quad(const QuadLight& q)
{
    const auto& c = q.corners;
    const Vec3 normal = cross(c[1] - c[0], c[2] - c[0]);
    const double n_len = length(normal);
    double scale = 0.0;
    for (const Vec3& p : c) {
        scale = std::max(scale, length(p - c[0]));
    }
    if (!(n_len > 1e-12 * scale * scale) || scale == 0.0) {
        throw std::invalid_argument("quad light is degenerate");
    }
    const Vec3 nn = normal / n_len;
    if (std::abs(dot(c[3] - c[0], nn)) > 1e-6 * scale) {
        throw std::invalid_argument("quad light corners are not coplanar");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec3& a = c[i];
        const Vec3& b = c[(i + 1) % 4];
        const Vec3& d = c[(i + 2) % 4];
        if (dot(cross(b - a, d - b), nn) <= 0.0) {
            throw std::invalid_argument("quad light is not convex");
        }
    }
    if (q.radiance.r < 0.0 || q.radiance.g < 0.0 || q.radiance.b < 0.0) {
        throw std::invalid_argument("light radiance must be nonnegative");
    }
}

} // namespace

void validate_light(const LightSpec& light)
{
    std::visit(
        [](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, QuadLight>) {
                validate_quad(l);
            } else if constexpr (std::is_same_v<T, DirectionalLight>) {
                if (!(l.half_angle > 0.0 && l.half_angle < 0.5 * kPi)) {
                    throw std::invalid_argument("directional light half-angle must be in (0, 90) degrees");
                }
                if (std::abs(length(l.direction) - 1.0) > 1e-6) {
                    throw std::invalid_argument("directional light direction must be a unit vector");
                }
                if (l.radiance.r < 0.0 || l.radiance.g < 0.0 || l.radiance.b < 0.0) {
                    throw std::invalid_argument("light radiance must be nonnegative");
                }
            } else {
                if (!(l.radius > 0.0)) {
                    throw std::invalid_argument("point light radius must be positive");
                }
                if (l.intensity.r < 0.0 || l.intensity.g < 0.0 || l.intensity.b < 0.0) {
                    throw std::invalid_argument("light intensity must be nonnegative");
                }
            }
        },
        light);
}

Probability make_probability(double unclamped)
{
    Probability p;
    p.unclamped = unclamped;
    p.value = clamp01(unclamped);
    p.clipped = unclamped > 1.0;
    return p;
}

Probability probability_from_integral(const MicrofacetModel& model, double integrated_ndf)
{
    return make_probability(integrated_ndf / total_microfacet_area(model));
}

Probability probability_area(const LtcTable& table, const GlintSurface& surface, double cos_nv,
                             std::span<const Vec3> poly, bool use_ndf_lobe)
{
    const double integrated = integrated_ndf_area(table, poly, cos_nv, surface.model.alpha, use_ndf_lobe);
    return probability_from_integral(surface.model, integrated);
}

Probability probability_cap(const GlintSurface& surface, const Vec3& wo, const Vec3& wi, double gamma)
{
    if (wo.z <= 0.0 || wi.z <= 0.0 || gamma <= 0.0) {
        return {};
    }
    const Vec3 h = halfway(wi, wo);
    const double d = ndf_eval(surface.model, h.z);
    const double area = total_microfacet_area(surface.model);
    return make_probability(cap_solid_angle(gamma) * d / (area * 4.0 * dot(h, wi)));
}

double baseline_probability(double R, const MicrofacetModel& model, double cos_nh)
{
    return clamp01(R * ndf_eval(model, cos_nh) / ndf_eval(model, 1.0));
}

double match_R(double gamma, const MicrofacetModel& model)
{
    return cap_solid_angle(gamma) * ndf_eval(model, 1.0) / (4.0 * total_microfacet_area(model));
}

std::uint64_t footprint_count(const GlintSurface& surface, const FootprintSample& fp)
{
    const double expected = surface.density * fp.area();
    if (!(expected >= 1.0)) {
        return 1;
    }
    if (expected >= 0x1.0p63) {
        return std::uint64_t{1} << 63;
    }
    return static_cast<std::uint64_t>(std::llround(expected));
}

namespace {

constexpr std::uint64_t kBernoulliLimit = 64;
// Below this variance the normal approximation is noticeably biased, so the
// exact inversion is used even for n > 64.
constexpr double kGaussianMinVariance = 9.0;
constexpr std::uint64_t kSplitTag = 0x53504c4954ULL;

double stream_uniform(std::uint64_t stream, std::uint64_t index) { return to_unit_double(hash_combine(stream, index)); }

/// Exact inversion of the binomial CDF, for small means (p <= 0.5).
std::uint64_t binomial_inversion(std::uint64_t n, double p, double u)
{
    const double q = 1.0 - p;
    const double ratio = p / q;
    double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
    double cdf = pmf;
    std::uint64_t k = 0;
    while (u >= cdf && k < n) {
        pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
        ++k;
        cdf += pmf;
        if (pmf == 0.0 && cdf < u) {
            break;
        }
    }
    return k;
}

} // namespace

std::uint64_t sample_binomial_stream(std::uint64_t n, double p, std::uint64_t stream)
{
    if (n == 0 || !(p > 0.0)) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    if (n <= kBernoulliLimit) {
        // splitmix64 sequence seeded by the stream: one mixing round per draw.
        // u < p on 53-bit uniforms, compared as integers.
        const std::uint64_t state = mix64(stream);
        const auto threshold = static_cast<std::uint64_t>(std::ceil(std::ldexp(p, 53)));
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            k += (mix64(state + i * 0x9e3779b97f4a7c15ULL) >> 11) < threshold ? 1 : 0;
        }
        return k;
    }
    const double mean = static_cast<double>(n) * p;
    const double variance = mean * (1.0 - p);
    if (variance < kGaussianMinVariance) {
        const double u = stream_uniform(stream, 0);
        if (p > 0.5) {
            return n - binomial_inversion(n, 1.0 - p, u);
        }
        return binomial_inversion(n, p, u);
    }
    // Midpoint of the 53-bit cell keeps u strictly inside (0, 1).
    const double u = (static_cast<double>(hash_combine(stream, 0) >> 11) + 0.5) * 0x1.0p-53;
    using NoPromotion = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
    const double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u, NoPromotion());
    const double k = std::floor(mean + std::sqrt(variance) * z + 0.5);
    if (k <= 0.0) {
        return 0;
    }
    if (k >= static_cast<double>(n)) {
        return n;
    }
    return static_cast<std::uint64_t>(k);
}

std::uint64_t sample_binomial_count(std::uint64_t n, double p, const CountKey& key, std::uint64_t seed)
{
    return sample_binomial_stream(n, p, hash_key(key, seed));
}

Rgb glint_radiance(const Rgb& smooth_lo, std::uint64_t n, double p, std::uint64_t k)
{
    if (!(p > 0.0) || n == 0) {
        return {};
    }
    return smooth_lo * (static_cast<double>(k) / (static_cast<double>(n) * p));
}

namespace {

/// Sequential conditional binomials; `out` has one slot per sub-probability
/// and `sum` is their total.
void split_into(std::uint64_t k, std::span<const double> sub_probs, double sum, std::uint64_t stream,
                std::span<std::uint64_t> out)
{
    std::fill(out.begin(), out.end(), 0);
    std::uint64_t remaining_k = k;
    double remaining_p = sum;
    for (std::size_t j = 0; j + 1 < sub_probs.size() && remaining_k > 0; ++j) {
        const double q = remaining_p > 0.0 ? std::min(1.0, sub_probs[j] / remaining_p) : 0.0;
        const std::uint64_t kj = sample_binomial_stream(remaining_k, q, hash_combine(stream, j));
        out[j] = kj;
        remaining_k -= kj;
        remaining_p -= sub_probs[j];
    }
    out.back() += remaining_k;
}

} // namespace

std::vector<std::uint64_t> split_count_multinomial(std::uint64_t k, std::span<const double> sub_probs, double p,
                                                   const CountKey& key, std::uint64_t seed)
{
    if (sub_probs.empty()) {
        throw std::invalid_argument("multinomial split needs at least one sub-probability");
    }
    double sum = 0.0;
    for (double q : sub_probs) {
        if (!(q >= 0.0)) {
            throw std::invalid_argument("sub-probabilities must be nonnegative");
        }
        sum += q;
    }
    if (std::abs(sum - p) > 1e-6) {
        throw std::invalid_argument("sub-probabilities do not sum to the total probability");
    }
    std::vector<std::uint64_t> out(sub_probs.size(), 0);
    split_into(k, sub_probs, sum, hash_combine(hash_key(key, seed), kSplitTag), out);
    return out;
}

FootprintCells footprint_cells(const GlintSurface& surface, const FootprintSample& fp)
{
    FootprintCells out;
    out.total = footprint_count(surface, fp);

    const double hx = 0.5 * (std::abs(fp.duv_dx.u) + std::abs(fp.duv_dy.u));
    const double hy = 0.5 * (std::abs(fp.duv_dx.v) + std::abs(fp.duv_dy.v));
    const double extent = std::max({2.0 * hx, 2.0 * hy, 1e-12});
    // Smallest power-of-two cell at least as wide as the footprint box, so
    // the box touches at most 2x2 cells.
    out.lod = static_cast<int>(std::ceil(std::log2(extent)));
    const double size = std::ldexp(1.0, out.lod);

    struct Span {
        std::int64_t first;
        std::array<double, 2> weight;
        int count;
    };
    auto axis = [size](double centre, double half) {
        const double lo = centre - half;
        const double hi = centre + half;
        Span s{static_cast<std::int64_t>(std::floor(lo / size)), {1.0, 0.0}, 1};
        const auto last = static_cast<std::int64_t>(std::floor(hi / size));
        if (last != s.first && half > 0.0) {
            const double split = static_cast<double>(last) * size;
            s.weight = {(split - lo) / (hi - lo), (hi - split) / (hi - lo)};
            s.count = 2;
        }
        return s;
    };
    const Span sx = axis(fp.uv.u, hx);
    const Span sy = axis(fp.uv.v, hy);

    std::array<double, 4> weights{};
    for (int j = 0; j < sy.count; ++j) {
        for (int i = 0; i < sx.count; ++i) {
            weights[out.cells.size()] = sx.weight[static_cast<std::size_t>(i)] * sy.weight[static_cast<std::size_t>(j)];
            out.cells.push_back({sx.first + i, sy.first + j, 0});
        }
    }
    if (out.cells.size() == 1) {
        out.cells.front().count = out.total;
        return out;
    }
    const std::size_t n = out.cells.size();
    double wsum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        wsum += weights[c];
    }
    const CountKey key{sx.first, sy.first, out.lod, -1};
    std::array<std::uint64_t, 4> counts{};
    split_into(out.total, std::span<const double>(weights.data(), n), wsum,
               hash_combine(hash_key(key, surface.seed), kSplitTag), std::span<std::uint64_t>(counts.data(), n));
    for (std::size_t c = 0; c < n; ++c) {
        out.cells[c].count = counts[c];
    }
    return out;
}

std::uint64_t count_reflecting(const FootprintCells& cells, double p, int light_id, std::uint64_t seed)
{
    std::uint64_t k = 0;
    for (const CellShare& c : cells.cells) {
        if (c.count > 0) {
            k += sample_binomial_count(c.count, p, {c.cell_x, c.cell_y, cells.lod, light_id}, seed);
        }
    }
    return k;
}

std::vector<std::uint64_t> count_reflecting_split(const FootprintCells& cells, double p,
                                                  std::span<const double> sub_probs, int light_id,
                                                  std::uint64_t seed)
{
    std::vector<std::uint64_t> out(sub_probs.size(), 0);
    for (const CellShare& c : cells.cells) {
        if (c.count == 0) {
            continue;
        }
        const CountKey key{c.cell_x, c.cell_y, cells.lod, light_id};
        const std::uint64_t k = sample_binomial_count(c.count, p, key, seed);
        const auto parts = split_count_multinomial(k, sub_probs, p, key, seed);
        for (std::size_t j = 0; j < parts.size(); ++j) {
            out[j] += parts[j];
        }
    }
    return out;
}

} // namespace glintlab
