// SPDX-License-Identifier: Apache-2.0

#include "glintlab/reference.hpp"

#include <cmath>
#include <vector>

namespace glintlab {

namespace {

// Samples per parallel work item. Fixed so that the partition, and hence
// every substream and partial sum, does not depend on the thread count.
constexpr std::uint64_t kChunk = 1u << 14;

/// Running sums for up to three channels.
struct Accum {
    std::array<double, 3> sum{};
    std::array<double, 3> sum_sq{};
    std::uint64_t count = 0;

    void add(const std::array<double, 3>& v)
    {
        for (std::size_t c = 0; c < 3; ++c) {
            sum[c] += v[c];
            sum_sq[c] += v[c] * v[c];
        }
        ++count;
    }
};

Accum merge(const Accum& a, const Accum& b)
{
    Accum r;
    for (std::size_t c = 0; c < 3; ++c) {
        r.sum[c] = a.sum[c] + b.sum[c];
        r.sum_sq[c] = a.sum_sq[c] + b.sum_sq[c];
    }
    r.count = a.count + b.count;
    return r;
}

/// Pairwise reduction in a fixed tree shape.
Accum reduce_pairwise(std::vector<Accum> parts)
{
    if (parts.empty()) {
        return {};
    }
    while (parts.size() > 1) {
        std::vector<Accum> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            next.push_back(merge(parts[i], parts[i + 1]));
        }
        if (parts.size() % 2 == 1) {
            next.push_back(parts.back());
        }
        parts = std::move(next);
    }
    return parts.front();
}

/// Runs `body(rng, first, count, accum)` over fixed chunks of [0, n).
template <class Body>
Accum run_chunks(std::uint64_t n, std::uint64_t seed, Execution exec, Body&& body)
{
    const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<Accum> parts(chunks);
    auto one = [&](std::uint64_t c) {
        Rng rng = Rng::substream(seed, c);
        const std::uint64_t first = c * kChunk;
        const std::uint64_t count = std::min(kChunk, n - first);
        body(rng, first, count, parts[c]);
    };
    if (exec == Execution::Parallel) {
        const auto total = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t c = 0; c < total; ++c) {
            one(static_cast<std::uint64_t>(c));
        }
    } else {
        for (std::uint64_t c = 0; c < chunks; ++c) {
            one(c);
        }
    }
    return reduce_pairwise(std::move(parts));
}

void finish(const Accum& a, std::size_t c, double& mean, double& err)
{
    const auto n = static_cast<double>(a.count);
    if (a.count == 0) {
        mean = 0.0;
        err = 0.0;
        return;
    }
    mean = a.sum[c] / n;
    const double var = a.count > 1 ? std::max(0.0, (a.sum_sq[c] - n * mean * mean) / (n - 1.0)) : 0.0;
    err = std::sqrt(var / n);
}

/// Area-uniform point on a convex quad, split into two triangles.
struct QuadSampler {
    explicit QuadSampler(const LocalQuad& q) : quad(q)
    {
        area0 = 0.5 * length(cross(q[1] - q[0], q[2] - q[0]));
        area1 = 0.5 * length(cross(q[2] - q[0], q[3] - q[0]));
        normal = cross(q[1] - q[0], q[2] - q[0]);
        const double len = length(normal);
        normal = len > 0.0 ? normal / len : Vec3{};
    }

    double area() const { return area0 + area1; }

    Vec3 sample(double u0, double u1, double u2) const
    {
        const bool first = u0 * area() < area0;
        const Vec3& a = quad[0];
        const Vec3& b = first ? quad[1] : quad[2];
        const Vec3& c = first ? quad[2] : quad[3];
        const double s = std::sqrt(u1);
        return a * (1.0 - s) + b * (s * (1.0 - u2)) + c * (s * u2);
    }

    LocalQuad quad;
    double area0 = 0.0;
    double area1 = 0.0;
    Vec3 normal;
};

/// Solid-angle Jacobian cos(theta_light) / r^2 and the direction to p.
bool to_direction(const Vec3& p, const Vec3& light_normal, Vec3& wi, double& jacobian)
{
    const double r2 = dot(p, p);
    if (!(r2 > 0.0)) {
        return false;
    }
    wi = p / std::sqrt(r2);
    if (wi.z <= 0.0) {
        return false;
    }
    jacobian = std::abs(dot(light_normal, wi)) / r2;
    return true;
}

double ndf_integrand(const MicrofacetModel& model, const Vec3& wi, const Vec3& wo)
{
    const Vec3 sum = wi + wo;
    const double len = length(sum);
    if (len <= 1e-12) {
        return 0.0;
    }
    const Vec3 h = sum / len;
    return ndf_eval(model, h.z) / (4.0 * dot(h, wi));
}

} // namespace

double exact_total_area(const MicrofacetModel& model)
{
    return model.kind == NdfKind::Beckmann ? beckmann_total_area_exact(model.alpha) : total_microfacet_area(model);
}

McEstimateRgb mc_radiance_area(const MicrofacetModel& model, const FresnelF0& f0, const Rgb& radiance,
                               const LocalQuad& quad, const Vec3& wo, std::uint64_t n_samples, std::uint64_t seed,
                               Execution exec)
{
    McEstimateRgb out;
    out.count = n_samples;
    const QuadSampler sampler(quad);
    if (n_samples == 0 || !(sampler.area() > 0.0) || radiance.is_black()) {
        return out;
    }
    const Vec3 n{0.0, 0.0, 1.0};
    const Accum acc = run_chunks(n_samples, seed, exec, [&](Rng& rng, std::uint64_t, std::uint64_t count, Accum& a) {
        for (std::uint64_t i = 0; i < count; ++i) {
            const double u0 = rng.uniform();
            const double u1 = rng.uniform();
            const double u2 = rng.uniform();
            Vec3 wi;
            double jac = 0.0;
            Rgb v;
            if (to_direction(sampler.sample(u0, u1, u2), sampler.normal, wi, jac)) {
                v = radiance * brdf_eval(model, f0, wi, wo, n) * (wi.z * jac * sampler.area());
            }
            a.add({v.r, v.g, v.b});
        }
    });
    finish(acc, 0, out.mean.r, out.std_error.r);
    finish(acc, 1, out.mean.g, out.std_error.g);
    finish(acc, 2, out.mean.b, out.std_error.b);
    return out;
}

McEstimate mc_integrated_ndf(const MicrofacetModel& model, const LocalQuad& quad, const Vec3& wo,
                             std::uint64_t n_samples, std::uint64_t seed, Execution exec)
{
    McEstimate out;
    out.count = n_samples;
    const QuadSampler sampler(quad);
    if (n_samples == 0 || !(sampler.area() > 0.0)) {
        return out;
    }
    const Accum acc = run_chunks(n_samples, seed, exec, [&](Rng& rng, std::uint64_t, std::uint64_t count, Accum& a) {
        for (std::uint64_t i = 0; i < count; ++i) {
            const double u0 = rng.uniform();
            const double u1 = rng.uniform();
            const double u2 = rng.uniform();
            Vec3 wi;
            double jac = 0.0;
            double v = 0.0;
            if (to_direction(sampler.sample(u0, u1, u2), sampler.normal, wi, jac)) {
                v = ndf_integrand(model, wi, wo) * jac * sampler.area();
            }
            a.add({v, 0.0, 0.0});
        }
    });
    finish(acc, 0, out.mean, out.std_error);
    return out;
}

std::uint64_t discrete_oracle_count(const MicrofacetModel& model, std::uint64_t n, const SphericalPolygon& poly,
                                    const Vec3& wo, Rng& rng)
{
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const Vec3 h = sample_ndf(model, rng);
        const Vec3 wi = reflect(wo, h);
        if (wi.z > 0.0 && contains(poly, wi)) {
            ++k;
        }
    }
    return k;
}

std::uint64_t discrete_oracle_count(const MicrofacetModel& model, std::uint64_t n, const SphericalPolygon& poly,
                                    const Vec3& wo, std::uint64_t seed, Execution exec)
{
    const Accum acc = run_chunks(n, seed, exec, [&](Rng& rng, std::uint64_t, std::uint64_t count, Accum& a) {
        a.sum[0] += static_cast<double>(discrete_oracle_count(model, count, poly, wo, rng));
        a.count += count;
    });
    return static_cast<std::uint64_t>(acc.sum[0]);
}

McEstimate expected_discrete_ndf_cap(const MicrofacetModel& model, std::uint64_t n, const SphericalCap& cap,
                                     std::uint64_t trials, std::uint64_t seed, Execution exec)
{
    McEstimate out;
    out.count = trials;
    if (trials == 0 || n == 0) {
        return out;
    }
    const double scale = exact_total_area(model) / static_cast<double>(n);
    // One work item per trial batch; each trial is one discrete surface.
    const std::uint64_t batch = std::max<std::uint64_t>(1, kChunk / n);
    const std::uint64_t batches = (trials + batch - 1) / batch;
    std::vector<Accum> parts(batches);
    auto one = [&](std::uint64_t b) {
        Rng rng = Rng::substream(seed, b);
        const std::uint64_t count = std::min(batch, trials - b * batch);
        for (std::uint64_t t = 0; t < count; ++t) {
            std::uint64_t inside = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                inside += contains(cap, sample_ndf(model, rng)) ? 1 : 0;
            }
            parts[b].add({scale * static_cast<double>(inside), 0.0, 0.0});
        }
    };
    if (exec == Execution::Parallel) {
        const auto total = static_cast<std::int64_t>(batches);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < total; ++b) {
            one(static_cast<std::uint64_t>(b));
        }
    } else {
        for (std::uint64_t b = 0; b < batches; ++b) {
            one(b);
        }
    }
    finish(reduce_pairwise(std::move(parts)), 0, out.mean, out.std_error);
    return out;
}

namespace {

/// Midpoint rule over the bilinear parameterization of the quad.
template <class F>
auto bilinear_midpoint(const LocalQuad& q, int grid, F&& f)
{
    using R = decltype(f(Vec3{}, 0.0, Vec3{}));
    R total{};
    const double h = 1.0 / grid;
    for (int j = 0; j < grid; ++j) {
        for (int i = 0; i < grid; ++i) {
            const double s = (i + 0.5) * h;
            const double t = (j + 0.5) * h;
            const Vec3 p = q[0] * ((1 - s) * (1 - t)) + q[1] * (s * (1 - t)) + q[2] * (s * t) + q[3] * ((1 - s) * t);
            const Vec3 ds = (q[1] - q[0]) * (1 - t) + (q[2] - q[3]) * t;
            const Vec3 dt = (q[3] - q[0]) * (1 - s) + (q[2] - q[1]) * s;
            const Vec3 nrm = cross(ds, dt);
            const double area = length(nrm) * h * h;
            if (area <= 0.0) {
                continue;
            }
            total += f(p, area, nrm / length(nrm));
        }
    }
    return total;
}

} // namespace

Rgb quad_radiance_stratified(const MicrofacetModel& model, const FresnelF0& f0, const Rgb& radiance,
                             const LocalQuad& quad, const Vec3& wo, int grid)
{
    const Vec3 n{0.0, 0.0, 1.0};
    return bilinear_midpoint(quad, grid, [&](const Vec3& p, double area, const Vec3& ln) {
        Vec3 wi;
        double jac = 0.0;
        if (!to_direction(p, ln, wi, jac)) {
            return Rgb{};
        }
        return radiance * brdf_eval(model, f0, wi, wo, n) * (wi.z * jac * area);
    });
}

double quad_ndf_stratified(const MicrofacetModel& model, const LocalQuad& quad, const Vec3& wo, int grid)
{
    return bilinear_midpoint(quad, grid, [&](const Vec3& p, double area, const Vec3& ln) {
        Vec3 wi;
        double jac = 0.0;
        if (!to_direction(p, ln, wi, jac)) {
            return 0.0;
        }
        return ndf_integrand(model, wi, wo) * jac * area;
    });
}

} // namespace glintlab
