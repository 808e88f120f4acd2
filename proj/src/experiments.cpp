// SPDX-License-Identifier: Apache-2.0

#include "glintlab/experiments.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glintlab {

namespace {

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

} // namespace

ImageComparison compare_images(const Image& a, const Image& ref, double threshold)
{
    if (a.width() != ref.width() || a.height() != ref.height()) {
        throw std::invalid_argument("images differ in size");
    }
    double peak = 0.0;
    for (const Rgb& p : ref.pixels()) {
        peak = std::max(peak, p.average());
    }
    ImageComparison c;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < ref.pixels().size(); ++i) {
        const double r = ref.pixels()[i].average();
        if (!(r > threshold * peak) || r <= 0.0) {
            continue;
        }
        const double v = a.pixels()[i].average();
        sum_sq += (v - r) * (v - r) / (r * r);
        c.mean_a += v;
        c.mean_ref += r;
        ++c.pixels;
    }
    if (c.pixels > 0) {
        const auto n = static_cast<double>(c.pixels);
        c.relative_rms = std::sqrt(sum_sq / n);
        c.mean_a /= n;
        c.mean_ref /= n;
    }
    return c;
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "," : "") << cells[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open CSV for writing: " + path.string());
    }
    out << str();
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing CSV: " + path.string());
    }
}

Image tile_images(const std::vector<const Image*>& images, int cols)
{
    if (images.empty() || cols < 1) {
        throw std::invalid_argument("nothing to tile");
    }
    const int w = images.front()->width();
    const int h = images.front()->height();
    const int rows = (static_cast<int>(images.size()) + cols - 1) / cols;
    Image out(w * cols, h * rows);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Image& img = *images[i];
        if (img.width() != w || img.height() != h) {
            throw std::invalid_argument("tiled images must share a size");
        }
        const int ox = static_cast<int>(i) % cols * w;
        const int oy = static_cast<int>(i) / cols * h;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out.at(ox + x, oy + y) = img.at(x, y);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convergence

namespace {

/// Mean N_P and N_P * p (first light, LTC or cap probability) over shaded pixels.
std::pair<double, double> expected_hits(const Scene& scene, const LtcTable& table, double scale)
{
    const Camera camera(scene.camera, scene.plane);
    GlintSurface surface = scene.surface;
    surface.density *= scale;
    double count_sum = 0.0;
    double hits_sum = 0.0;
    std::uint64_t n = 0;
    for (int y = 0; y < scene.camera.height; ++y) {
        for (int x = 0; x < scene.camera.width; ++x) {
            const auto hit = camera.trace(x, y);
            if (!hit) {
                continue;
            }
            const ShadingFrame frame({0.0, 0.0, 1.0}, hit->wo);
            const Vec3 wo = frame.to_local(hit->wo);
            if (!(wo.z > 0.0)) {
                continue;
            }
            const auto count = static_cast<double>(footprint_count(surface, hit->footprint));
            double p = 0.0;
            const LightSpec& light = scene.lights.front();
            if (const auto* q = std::get_if<QuadLight>(&light)) {
                std::array<Vec3, 4> local;
                for (std::size_t c = 0; c < 4; ++c) {
                    local[c] = frame.to_local(q->corners[c] - hit->position);
                }
                p = probability_area(table, surface, wo.z, local).value;
            } else if (const auto* d = std::get_if<DirectionalLight>(&light)) {
                p = probability_cap(surface, wo, frame.to_local(d->direction), d->half_angle).value;
            }
            count_sum += count;
            hits_sum += count * p;
            ++n;
        }
    }
    if (n == 0) {
        return {0.0, 0.0};
    }
    return {count_sum / static_cast<double>(n), hits_sum / static_cast<double>(n)};
}

} // namespace

ConvergenceResult experiment_convergence(const Scene& scene, const LtcTable& table, int levels, std::uint64_t seed,
                                         double base_scale)
{
    if (levels < 2) {
        throw std::invalid_argument("convergence needs at least 2 levels");
    }
    ConvergenceResult out;
    ShadeOptions smooth_opt = options_for(scene);
    smooth_opt.glint = false;
    smooth_opt.lo = Estimator::Ltc;
    out.smooth = render(scene, &table, seed, smooth_opt);

    const int w = scene.camera.width;
    const int h = scene.camera.height;
    out.strips = Image(w, h);
    for (int level = 0; level < levels; ++level) {
        ShadeOptions opt = smooth_opt;
        opt.glint = true;
        opt.density_scale = base_scale * std::pow(4.0, level);
        const Image img = render(scene, &table, seed, opt);

        ConvergenceLevel row;
        row.level = level;
        row.density_scale = opt.density_scale;
        std::tie(row.mean_count, row.mean_expected_hits) = expected_hits(scene, table, opt.density_scale);
        row.vs_smooth = compare_images(img, out.smooth);
        out.levels.push_back(row);

        const int x0 = level * w / levels;
        const int x1 = (level + 1) * w / levels;
        for (int y = 0; y < h; ++y) {
            for (int x = x0; x < x1; ++x) {
                out.strips.at(x, y) = img.at(x, y);
            }
        }
    }
    return out;
}

CsvTable ConvergenceResult::csv() const
{
    CsvTable t;
    t.header = {"level", "density_scale", "mean_count", "mean_expected_hits", "relative_rms_vs_smooth",
                "mean_glint", "mean_smooth", "pixels"};
    for (const auto& l : levels) {
        t.rows.push_back({std::to_string(l.level), fmt(l.density_scale), fmt(l.mean_count),
                          fmt(l.mean_expected_hits), fmt(l.vs_smooth.relative_rms), fmt(l.vs_smooth.mean_a),
                          fmt(l.vs_smooth.mean_ref), std::to_string(l.vs_smooth.pixels)});
    }
    return t;
}

// ---------------------------------------------------------------------------
// Subdivision

SubdivisionResult experiment_subdivision(const Scene& scene, const LtcTable* table, int k_splits, int seeds,
                                         SubdivisionVariant variant, std::uint64_t first_seed)
{
    if (k_splits < 1) {
        throw std::invalid_argument("split count must be positive");
    }
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k_splits))));
    if (side * side != k_splits) {
        throw std::invalid_argument("split count must be a perfect square, got " + std::to_string(k_splits));
    }
    if (seeds < 1) {
        throw std::invalid_argument("need at least one seed");
    }

    ShadeOptions whole;
    whole.glint = true;
    whole.use_ndf_lobe = scene.render.use_ndf_lobe;
    whole.split = side;
    whole.split_counts = false;
    if (variant == SubdivisionVariant::Stratified) {
        whole.lo = Estimator::Stratified;
        whole.p = Estimator::Stratified;
    }
    ShadeOptions split = whole;
    split.split_counts = true;

    SubdivisionResult out;
    out.split = side;
    out.seeds = seeds;
    const std::size_t n_pix = static_cast<std::size_t>(scene.camera.width) * scene.camera.height;
    std::vector<double> sum(n_pix, 0.0);
    std::vector<double> sum_sq(n_pix, 0.0);
    double mean_sum = 0.0;
    double mean_sq = 0.0;
    double rms_sum = 0.0;
    double abs_rms_sum = 0.0;
    double scale = 0.0;

    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(s);
        const Image a = render(scene, table, seed, whole);
        const Image b = render(scene, table, seed, split);
        if (s == 0) {
            out.whole = a;
            out.subdivided = b;
            out.first_seed_identical = a == b;
        }
        double img_mean = 0.0;
        double img_sq = 0.0;
        for (std::size_t i = 0; i < n_pix; ++i) {
            const double d = b.pixels()[i].average() - a.pixels()[i].average();
            sum[i] += d;
            sum_sq[i] += d * d;
            img_mean += d;
            img_sq += d * d;
            out.max_abs_difference = std::max(out.max_abs_difference, std::abs(d));
            scale = std::max(scale, a.pixels()[i].average());
        }
        img_mean /= static_cast<double>(n_pix);
        mean_sum += img_mean;
        mean_sq += img_mean * img_mean;
        rms_sum += compare_images(b, a).relative_rms;
        abs_rms_sum += std::sqrt(img_sq / static_cast<double>(n_pix));
    }

    const auto n = static_cast<double>(seeds);
    out.mean_difference = mean_sum / n;
    out.mean_difference_se =
        seeds > 1 ? std::sqrt(std::max(0.0, (mean_sq - n * out.mean_difference * out.mean_difference) / (n - 1)) / n)
                  : 0.0;
    out.relative_rms_difference = rms_sum / n;
    out.rms_difference = abs_rms_sum / n;

    // Differences below this are rounding, not sampling.
    const double tiny = 1e-9 * std::max(scale, 1e-300);
    std::uint64_t above = 0;
    for (std::size_t i = 0; i < n_pix; ++i) {
        const double m = sum[i] / n;
        const double var = seeds > 1 ? std::max(0.0, (sum_sq[i] - n * m * m) / (n - 1)) : 0.0;
        const double se = std::sqrt(var / n);
        if (std::abs(m) > tiny && std::abs(m) > 3.0 * se) {
            ++above;
        }
    }
    out.fraction_z_above_3 = static_cast<double>(above) / static_cast<double>(n_pix);
    return out;
}

CsvTable SubdivisionResult::csv() const
{
    CsvTable t;
    t.header = {"patches",          "seeds",          "first_seed_identical", "mean_difference",
                "mean_difference_se", "fraction_z_above_3", "relative_rms_difference", "rms_difference", "max_abs_difference"};
    t.rows.push_back({std::to_string(split * split), std::to_string(seeds), first_seed_identical ? "1" : "0",
                      fmt(mean_difference), fmt(mean_difference_se), fmt(fraction_z_above_3),
                      fmt(relative_rms_difference), fmt(rms_difference), fmt(max_abs_difference)});
    return t;
}

// ---------------------------------------------------------------------------
// R matching

std::vector<MatchRRow> experiment_match_r(const std::vector<double>& gamma_deg, const std::vector<double>& roughness,
                                          NdfKind kind)
{
    std::vector<MatchRRow> rows;
    const Vec3 n{0.0, 0.0, 1.0};
    for (double r : roughness) {
        const MicrofacetModel model = MicrofacetModel::from_perceptual(kind, r);
        const GlintSurface surface(model, FresnelF0(1.0), 1.0, 0);
        for (double g : gamma_deg) {
            if (!(g > 0.0 && g < 90.0)) {
                throw std::invalid_argument("cap half-angle must be in (0, 90) degrees");
            }
            MatchRRow row;
            row.gamma_deg = g;
            row.roughness = r;
            row.R = match_R(radians(g), model);
            row.p_cap_unclamped = probability_cap(surface, n, n, radians(g)).unclamped;
            rows.push_back(row);
        }
    }
    return rows;
}

CsvTable match_r_csv(const std::vector<MatchRRow>& rows)
{
    CsvTable t;
    t.header = {"gamma_deg", "roughness", "R", "p_cap_unclamped", "clipped"};
    for (const auto& r : rows) {
        t.rows.push_back({fmt(r.gamma_deg), fmt(r.roughness), fmt(r.R), fmt(r.p_cap_unclamped),
                          r.p_cap_unclamped > 1.0 ? "1" : "0"});
    }
    return t;
}

// ---------------------------------------------------------------------------
// Ablation

AblationResult experiment_ablation(const Scene& scene, const LtcTable& table, std::uint64_t seed)
{
    ShadeOptions base = options_for(scene);
    base.glint = true;
    base.baseline = false;
    auto run = [&](Estimator lo, Estimator p, bool ndf_lobe) {
        ShadeOptions o = base;
        o.lo = lo;
        o.p = p;
        o.use_ndf_lobe = ndf_lobe;
        return render(scene, &table, seed, o);
    };
    AblationResult out;
    out.mc_lo_mc_p = run(Estimator::MonteCarlo, Estimator::MonteCarlo, false);
    out.mc_lo_ltc_p = run(Estimator::MonteCarlo, Estimator::Ltc, false);
    out.ltc_lo_mc_p = run(Estimator::Ltc, Estimator::MonteCarlo, false);
    out.ltc_lo_ltc_p = run(Estimator::Ltc, Estimator::Ltc, false);
    out.ltc_lo_ndf_ltc_p = run(Estimator::Ltc, Estimator::Ltc, true);
    out.grid = tile_images({&out.mc_lo_mc_p, &out.mc_lo_ltc_p, &out.ltc_lo_mc_p, &out.ltc_lo_ltc_p}, 2);
    return out;
}

CsvTable AblationResult::csv() const
{
    CsvTable t;
    t.header = {"lo_source", "p_source", "mean_radiance", "relative_rms_vs_all_mc"};
    auto add = [&](const char* lo, const char* p, const Image& img) {
        const ImageComparison c = compare_images(img, mc_lo_mc_p);
        double mean = 0.0;
        for (const Rgb& px : img.pixels()) {
            mean += px.average();
        }
        mean /= static_cast<double>(img.pixels().size());
        t.rows.push_back({lo, p, fmt(mean), fmt(c.relative_rms)});
    };
    add("mc", "mc", mc_lo_mc_p);
    add("mc", "ltc", mc_lo_ltc_p);
    add("ltc", "mc", ltc_lo_mc_p);
    add("ltc", "ltc", ltc_lo_ltc_p);
    add("ltc", "ndf_ltc", ltc_lo_ndf_ltc_p);
    return t;
}

} // namespace glintlab
