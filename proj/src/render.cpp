// SPDX-License-Identifier: Apache-2.0

#include "glintlab/render.hpp"

#include "glintlab/reference.hpp"
#include "glintlab/rng.hpp"

#include <omp.h>

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace glintlab {

Camera::Camera(const CameraSpec& spec, const PlaneSpec& plane) : spec_(spec), plane_(plane)
{
    forward_ = normalize(spec.look_at - spec.position);
    right_ = normalize(cross(forward_, spec.up));
    up_ = cross(right_, forward_);
    const double tan_half = std::tan(0.5 * radians(spec.fov_deg));
    const double aspect = static_cast<double>(spec.width) / spec.height;
    step_x_ = 2.0 * tan_half * aspect / spec.width;
    step_y_ = 2.0 * tan_half / spec.height;
}

std::optional<PlaneHit> Camera::trace(int x, int y) const
{
    const double tan_half = 0.5 * step_y_ * spec_.height;
    const double half_w = 0.5 * step_x_ * spec_.width;
    const Vec3 d = forward_ + right_ * ((x + 0.5) * step_x_ - half_w) + up_ * (tan_half - (y + 0.5) * step_y_);
    if (!(std::abs(d.z) > 1e-15)) {
        return std::nullopt;
    }
    const double t = (plane_.center.z - spec_.position.z) / d.z;
    if (!(t > 0.0)) {
        return std::nullopt;
    }
    const Vec3 p = spec_.position + d * t;
    if (std::abs(p.x - plane_.center.x) > plane_.half_size || std::abs(p.y - plane_.center.y) > plane_.half_size) {
        return std::nullopt;
    }
    // Differentiate p = o + t(d) d with t = (z0 - o.z) / d.z.
    const Vec3 dd_x = right_ * step_x_;
    const Vec3 dd_y = up_ * (-step_y_);
    const Vec3 dp_x = dd_x * t + d * (-t * dd_x.z / d.z);
    const Vec3 dp_y = dd_y * t + d * (-t * dd_y.z / d.z);

    PlaneHit hit;
    hit.position = p;
    hit.wo = normalize(spec_.position - p);
    const double s = plane_.uv_scale;
    hit.footprint.uv = {(p.x - plane_.center.x) * s, (p.y - plane_.center.y) * s};
    hit.footprint.duv_dx = {dp_x.x * s, dp_x.y * s};
    hit.footprint.duv_dy = {dp_y.x * s, dp_y.y * s};
    return hit;
}

ShadeOptions options_for(const Scene& scene)
{
    ShadeOptions o;
    o.baseline_R = scene.render.baseline_R;
    o.use_ndf_lobe = scene.render.use_ndf_lobe;
    o.mc_samples = static_cast<std::uint64_t>(scene.render.spp);
    switch (scene.render.mode) {
    case RenderMode::SmoothLtc:
        o.glint = false;
        break;
    case RenderMode::SmoothMc:
        o.glint = false;
        o.lo = Estimator::MonteCarlo;
        break;
    case RenderMode::Glint:
        break;
    case RenderMode::GlintBaseline:
        o.baseline = true;
        break;
    case RenderMode::Oracle:
        o.lo = Estimator::MonteCarlo;
        o.p = Estimator::MonteCarlo;
        break;
    }
    return o;
}

std::vector<std::array<Vec3, 4>> subdivide_quad(const std::array<Vec3, 4>& c, int n)
{
    if (n < 1) {
        throw std::invalid_argument("subdivision count must be at least 1");
    }
    if (n == 1) {
        return {c};
    }
    auto at = [&](int i, int j) {
        const double s = static_cast<double>(i) / n;
        const double t = static_cast<double>(j) / n;
        return c[0] * ((1 - s) * (1 - t)) + c[1] * (s * (1 - t)) + c[2] * (s * t) + c[3] * ((1 - s) * t);
    };
    std::vector<std::array<Vec3, 4>> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return out;
}

int configure_threads_from_env()
{
    if (const char* env = std::getenv("GLINTLAB_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 1 || n > 4096) {
            throw std::invalid_argument(std::string("GLINTLAB_THREADS must be a positive integer, got '") + env + "'");
        }
        omp_set_num_threads(static_cast<int>(n));
    }
    return omp_get_max_threads();
}

namespace {

constexpr std::uint64_t kLoStream = 1;
constexpr std::uint64_t kPStream = 2;

struct Contribution {
    Rgb lo;
    Probability p;
};

class PixelShader {
public:
    PixelShader(const Scene& scene, const LtcTable* table, std::uint64_t seed, const ShadeOptions& options)
        : scene_(scene), table_(table), seed_(seed), opt_(options), model_(scene.surface.model),
          area_(total_microfacet_area(scene.surface.model))
    {
        const bool needs_table = opt_.lo == Estimator::Ltc || (opt_.glint && !opt_.baseline && opt_.p == Estimator::Ltc);
        if (needs_table) {
            if (table_ == nullptr) {
                throw std::invalid_argument("this render mode needs an LTC table");
            }
            if (table_->kind() != model_.kind) {
                throw std::invalid_argument("LTC table was baked for a different microfacet model");
            }
        }
        if (opt_.split < 1) {
            throw std::invalid_argument("subdivision count must be at least 1");
        }
    }

    Rgb shade(const PlaneHit& hit, std::uint64_t pixel, RenderStats& stats) const
    {
        const ShadingFrame frame({0.0, 0.0, 1.0}, hit.wo);
        const Vec3 wo = frame.to_local(hit.wo);
        if (!(wo.z > 0.0)) {
            return {};
        }
        ++stats.shaded;

        GlintSurface surface = scene_.surface;
        surface.density *= opt_.density_scale;
        FootprintCells cells;
        if (opt_.glint) {
            cells = footprint_cells(surface, hit.footprint);
        }

        Rgb out;
        for (std::size_t i = 0; i < scene_.lights.size(); ++i) {
            const int light_id = static_cast<int>(i);
            const std::uint64_t stream = hash_combine(hash_combine(seed_, pixel), i);
            const LightSpec& light = scene_.lights[i];
            if (const auto* quad = std::get_if<QuadLight>(&light)) {
                out += shade_quad(*quad, frame, hit.position, wo, cells, light_id, stream, stats);
            } else {
                const Contribution c = cap_light(light, frame, hit.position, wo);
                out += finish(c, cells, light_id, stats);
            }
        }
        return out;
    }

private:
    Rgb finish(const Contribution& c, const FootprintCells& cells, int light_id, RenderStats& stats) const
    {
        if (!opt_.glint) {
            return c.lo;
        }
        if (c.p.clipped) {
            ++stats.clipped;
        }
        stats.max_unclamped_p = std::max(stats.max_unclamped_p, c.p.unclamped);
        if (c.lo.is_black() && !(c.p.value > 0.0)) {
            return {};
        }
        const std::uint64_t k = count_reflecting(cells, c.p.value, light_id, seed_);
        return glint_radiance(c.lo, cells.total, c.p.value, k);
    }

    Probability baseline(const Vec3& wi, const Vec3& wo) const
    {
        if (wi.z <= 0.0) {
            return {};
        }
        const Vec3 h = halfway(wi, wo);
        return make_probability(baseline_probability(opt_.baseline_R, model_, h.z));
    }

    Contribution cap_light(const LightSpec& light, const ShadingFrame& frame, const Vec3& x, const Vec3& wo) const
    {
        Vec3 wi;
        double gamma = 0.0;
        Rgb scale;
        if (const auto* d = std::get_if<DirectionalLight>(&light)) {
            wi = frame.to_local(d->direction);
            gamma = d->half_angle;
            scale = d->radiance * cap_solid_angle(gamma);
        } else {
            const auto& pl = std::get<PointLight>(light);
            const Vec3 to = pl.position - x;
            const double dist = length(to);
            if (!(dist > pl.radius)) {
                return {};
            }
            wi = frame.to_local(to / dist);
            gamma = std::asin(pl.radius / dist);
            scale = pl.intensity / (dist * dist);
        }
        if (wi.z <= 0.0) {
            return {};
        }
        Contribution c;
        c.lo = scale * brdf_eval(model_, scene_.surface.f0, wi, wo, {0.0, 0.0, 1.0}) * wi.z;
        c.p = opt_.baseline ? baseline(wi, wo) : probability_cap(scene_.surface, wo, wi, gamma);
        return c;
    }

    /// Smooth radiance and unclamped probability of one (sub-)quad.
    void quad_terms(const LocalQuad& q, const Rgb& radiance, const Vec3& wo, int grid, std::uint64_t stream, Rgb& lo,
                    double& p_raw) const
    {
        const double cos_nv = wo.z;
        std::optional<LtcAreaTerms> ltc;
        auto ltc_terms = [&]() -> const LtcAreaTerms& {
            if (!ltc) {
                ltc = ltc_area_terms(*table_, scene_.surface.f0, radiance, q, cos_nv, model_.alpha,
                                     opt_.use_ndf_lobe);
            }
            return *ltc;
        };
        switch (opt_.lo) {
        case Estimator::Ltc:
            lo = ltc_terms().radiance;
            break;
        case Estimator::MonteCarlo:
            lo = mc_radiance_area(model_, scene_.surface.f0, radiance, q, wo, opt_.mc_samples,
                                  hash_combine(stream, kLoStream), Execution::Serial)
                     .mean;
            break;
        case Estimator::Stratified:
            lo = quad_radiance_stratified(model_, scene_.surface.f0, radiance, q, wo, grid);
            break;
        }
        if (!opt_.glint) {
            p_raw = 0.0;
            return;
        }
        if (opt_.baseline) {
            Vec3 centre{};
            for (const Vec3& v : q) {
                centre += v;
            }
            p_raw = baseline(normalize(centre), wo).unclamped;
            return;
        }
        switch (opt_.p) {
        case Estimator::Ltc:
            p_raw = ltc_terms().integrated_ndf / area_;
            break;
        case Estimator::MonteCarlo:
            p_raw = mc_integrated_ndf(model_, q, wo, opt_.mc_samples, hash_combine(stream, kPStream),
                                      Execution::Serial)
                        .mean /
                    area_;
            break;
        case Estimator::Stratified:
            p_raw = quad_ndf_stratified(model_, q, wo, grid) / area_;
            break;
        }
    }

    Rgb shade_quad(const QuadLight& light, const ShadingFrame& frame, const Vec3& x, const Vec3& wo,
                   const FootprintCells& cells, int light_id, std::uint64_t stream, RenderStats& stats) const
    {
        LocalQuad local;
        for (std::size_t c = 0; c < 4; ++c) {
            local[c] = frame.to_local(light.corners[c] - x);
        }
        const bool patched = opt_.split > 1 && (opt_.split_counts || opt_.lo == Estimator::Stratified ||
                                                 opt_.p == Estimator::Stratified);
        if (!patched) {
            Contribution c;
            double p_raw = 0.0;
            quad_terms(local, light.radiance, wo, opt_.stratified_grid, stream, c.lo, p_raw);
            c.p = make_probability(p_raw);
            return finish(c, cells, light_id, stats);
        }

        const auto patches = subdivide_quad(local, opt_.split);
        const int grid = std::max(1, opt_.stratified_grid / opt_.split);
        std::vector<Rgb> lo(patches.size());
        std::vector<double> p(patches.size(), 0.0);
        for (std::size_t j = 0; j < patches.size(); ++j) {
            quad_terms(patches[j], light.radiance, wo, grid, hash_combine(stream, 16 + j), lo[j], p[j]);
        }
        if (!opt_.split_counts) {
            Contribution c;
            double p_sum = 0.0;
            for (std::size_t j = 0; j < patches.size(); ++j) {
                c.lo += lo[j];
                p_sum += p[j];
            }
            c.p = make_probability(p_sum);
            return finish(c, cells, light_id, stats);
        }

        if (!opt_.glint) {
            Rgb sum;
            for (const Rgb& v : lo) {
                sum += v;
            }
            return sum;
        }
        double p_sum = 0.0;
        for (double v : p) {
            p_sum += v;
        }
        const Probability total = make_probability(p_sum);
        if (total.clipped) {
            ++stats.clipped;
            for (double& v : p) {
                v /= p_sum;
            }
        }
        stats.max_unclamped_p = std::max(stats.max_unclamped_p, total.unclamped);
        double p_total = 0.0;
        for (double v : p) {
            p_total += v;
        }
        const auto k = count_reflecting_split(cells, p_total, p, light_id, seed_);
        Rgb out;
        for (std::size_t j = 0; j < patches.size(); ++j) {
            out += glint_radiance(lo[j], cells.total, p[j], k[j]);
        }
        return out;
    }

    const Scene& scene_;
    const LtcTable* table_;
    std::uint64_t seed_;
    ShadeOptions opt_;
    MicrofacetModel model_;
    double area_;
};

} // namespace

Image render(const Scene& scene, const LtcTable* table, std::uint64_t seed, const ShadeOptions& options,
             Execution exec, RenderStats* stats)
{
    const PixelShader shader(scene, table, seed, options);
    const Camera camera(scene.camera, scene.plane);
    const int w = scene.camera.width;
    const int h = scene.camera.height;
    Image img(w, h);
    std::vector<RenderStats> row_stats(static_cast<std::size_t>(h));

    auto row = [&](int y) {
        RenderStats& st = row_stats[static_cast<std::size_t>(y)];
        for (int x = 0; x < w; ++x) {
            if (const auto hit = camera.trace(x, y)) {
                const auto pixel = static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(w) +
                                   static_cast<std::uint64_t>(x);
                img.at(x, y) = shader.shade(*hit, pixel, st);
            }
        }
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int y = 0; y < h; ++y) {
            row(y);
        }
    } else {
        for (int y = 0; y < h; ++y) {
            row(y);
        }
    }

    if (stats != nullptr) {
        *stats = {};
        for (const RenderStats& s : row_stats) {
            stats->shaded += s.shaded;
            stats->clipped += s.clipped;
            stats->max_unclamped_p = std::max(stats->max_unclamped_p, s.max_unclamped_p);
        }
    }
    return img;
}

Image render(const Scene& scene, const LtcTable* table, std::uint64_t seed, Execution exec, RenderStats* stats)
{
    return render(scene, table, seed, options_for(scene), exec, stats);
}

} // namespace glintlab
