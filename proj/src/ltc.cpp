// SPDX-License-Identifier: Apache-2.0

#include "glintlab/ltc.hpp"

#include "nelder_mead.hpp"

#include <omp.h>

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace glintlab {

double Mat3::determinant() const
{
    const Mat3& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 Mat3::inverse() const
{
    const Mat3& a = *this;
    const double inv_det = 1.0 / determinant();
    Mat3 r;
    r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) * inv_det;
    r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv_det;
    r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv_det;
    r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) * inv_det;
    r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv_det;
    r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv_det;
    r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) * inv_det;
    r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv_det;
    r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv_det;
    return r;
}

LtcLobe::LtcLobe(const Mat3& m, LtcTarget target) : m_(m), target_(target)
{
    double scale = 0.0;
    for (double v : m.m) {
        scale = std::max(scale, std::abs(v));
    }
    const double det = m.determinant();
    if (!std::isfinite(det) || scale == 0.0 || std::abs(det) <= 1e-14 * scale * scale * scale) {
        throw std::invalid_argument("LTC matrix is singular");
    }
    inv_ = m.inverse();
    det_inv_ = std::abs(inv_.determinant());
}

double ltc_eval(const LtcLobe& lobe, const Vec3& w)
{
    const Vec3 wo = lobe.inverse() * w;
    const double len = length(wo);
    const double z = wo.z / len;
    if (z <= 0.0) {
        return 0.0;
    }
    return kInvPi * z * lobe.inverse_determinant() / (len * len * len);
}

Vec3 ltc_sample(const LtcLobe& lobe, double u1, double u2)
{
    const double r = std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    const Vec3 cosine{r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1))};
    return normalize(lobe.matrix() * cosine);
}

double clamped_cosine_polygon(std::span<const Vec3> vertices)
{
    const std::size_t n = vertices.size();
    if (n < 3) {
        return 0.0;
    }

    // Clip against the plane z = 0, keeping z >= 0.
    std::vector<Vec3> clipped;
    clipped.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& cur = vertices[i];
        const Vec3& nxt = vertices[(i + 1) % n];
        const bool cur_in = cur.z >= 0.0;
        const bool nxt_in = nxt.z >= 0.0;
        if (cur_in) {
            clipped.push_back(cur);
        }
        if (cur_in != nxt_in) {
            const double t = cur.z / (cur.z - nxt.z);
            Vec3 p = cur + (nxt - cur) * t;
            p.z = 0.0;
            clipped.push_back(p);
        }
    }
    if (clipped.size() < 3) {
        return 0.0;
    }
    for (Vec3& v : clipped) {
        const double len = length(v);
        if (len == 0.0) {
            return 0.0;
        }
        v = v / len;
    }

    double sum = 0.0;
    const std::size_t m = clipped.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec3& v1 = clipped[i];
        const Vec3& v2 = clipped[(i + 1) % m];
        const Vec3 c = cross(v1, v2);
        const double s = length(c);
        if (s <= 1e-300) {
            continue;
        }
        const double theta = std::atan2(s, dot(v1, v2));
        sum += theta * c.z / s;
    }
    return clamp01(std::abs(sum) / (2.0 * kPi));
}

double integrate_ltc_polygon(const LtcLobe& lobe, std::span<const Vec3> vertices)
{
    std::vector<Vec3> transformed;
    transformed.reserve(vertices.size());
    for (const Vec3& v : vertices) {
        transformed.push_back(lobe.inverse() * v);
    }
    return clamped_cosine_polygon(transformed);
}

double integrate_ltc_polygon(const LtcLobe& lobe, const SphericalPolygon& poly)
{
    return integrate_ltc_polygon(lobe, std::span<const Vec3>(poly.vertices()));
}

// ---------------------------------------------------------------------------
// Fitting

double ltc_target_density(const MicrofacetModel& model, const Vec3& wo, LtcTarget target, double normalization,
                          const Vec3& wi)
{
    const double value =
        target == LtcTarget::BRDF ? brdf_cos_unit_fresnel(model, wi, wo) : ndf_light_density(model, wi, wo);
    return value / normalization;
}

namespace {

Vec3 view_from_cos(double cos_nv)
{
    const double c = std::clamp(cos_nv, 0.0, 1.0);
    return {std::sqrt(1.0 - c * c), 0.0, c};
}

/// Density with which the target sampler (cosine-weighted normals, mirrored
/// about the view) produces wi; zero outside the region it reaches.
double target_sampling_pdf(const MicrofacetModel& model, const Vec3& wo, const Vec3& wi)
{
    const Vec3 sum = wi + wo;
    const double len = length(sum);
    if (len <= 1e-12) {
        return 0.0;
    }
    const Vec3 h = sum / len;
    const double h_dot_i = dot(h, wi);
    if (h.z <= 0.0 || h_dot_i <= 0.0) {
        return 0.0;
    }
    return ndf_eval(model, h.z) * h.z / (4.0 * h_dot_i);
}

/// Fixed direction set and target values for one fitting problem.
class FitProblem {
public:
    FitProblem(const MicrofacetModel& model, double cos_nv, LtcTarget target, const FitOptions& options)
        : model_(model), wo_(view_from_cos(cos_nv)), target_(target), grid_(options.grid)
    {
        normalization_ = target == LtcTarget::BRDF ? fgd(model, cos_nv) : d_pr(model, cos_nv);
        const int g = grid_;
        strata_.reserve(static_cast<std::size_t>(g * g));
        for (int j = 0; j < g; ++j) {
            for (int i = 0; i < g; ++i) {
                strata_.push_back({(i + 0.5) / g, (j + 0.5) / g});
            }
        }
        for (const auto& [u1, u2] : strata_) {
            const Vec3 h = sample_ndf_cosine(model_, u1, u2);
            if (dot(h, wo_) <= 0.0) {
                continue;
            }
            TargetSample s;
            s.wi = reflect(wo_, h);
            s.value = ltc_target_density(model_, wo_, target_, normalization_, s.wi);
            s.pdf = target_sampling_pdf(model_, wo_, s.wi);
            if (s.pdf > 0.0) {
                target_samples_.push_back(s);
            }
        }
    }

    double normalization() const { return normalization_; }

    double residual(const LtcParams& p) const
    {
        if (!(p.a > 1e-7 && p.c > 1e-7) || !std::isfinite(p.b) || !std::isfinite(p.d)) {
            return std::numeric_limits<double>::infinity();
        }
        const Mat3 m = p.matrix();
        const double det = m.determinant();
        if (!(det > 1e-12)) {
            return std::numeric_limits<double>::infinity();
        }
        const LtcLobe lobe(m);
        const double n = static_cast<double>(strata_.size());
        double err = 0.0;
        for (const TargetSample& s : target_samples_) {
            const double l = ltc_eval(lobe, s.wi);
            const double diff = l - s.value;
            err += diff * diff / (0.5 * (s.pdf + l));
        }
        for (const auto& [u1, u2] : strata_) {
            const Vec3 wi = ltc_sample(lobe, u1, u2);
            const double l = ltc_eval(lobe, wi);
            if (l <= 0.0) {
                continue;
            }
            const double t = ltc_target_density(model_, wo_, target_, normalization_, wi);
            const double pdf_t = target_sampling_pdf(model_, wo_, wi);
            const double diff = l - t;
            err += diff * diff / (0.5 * (pdf_t + l));
        }
        return err / (2.0 * n);
    }

private:
    struct TargetSample {
        Vec3 wi;
        double value = 0.0;
        double pdf = 0.0;
    };

    MicrofacetModel model_;
    Vec3 wo_;
    LtcTarget target_;
    int grid_;
    double normalization_ = 1.0;
    std::vector<std::pair<double, double>> strata_;
    std::vector<TargetSample> target_samples_;
};

LtcParams to_params(const std::array<double, 4>& x) { return {x[0], x[1], x[2], x[3]}; }

} // namespace

double ltc_fit_residual(const MicrofacetModel& model, double cos_nv, LtcTarget target, const LtcParams& params,
                        const FitOptions& options)
{
    return FitProblem(model, cos_nv, target, options).residual(params);
}

FitResult fit_ltc(const MicrofacetModel& model, double cos_nv, LtcTarget target, const FitOptions& options,
                  const LtcParams* warm_start)
{
    const FitProblem problem(model, cos_nv, target, options);
    auto objective = [&](const std::array<double, 4>& x) { return problem.residual(to_params(x)); };

    // Candidate starts: warm start (if any), lobes of width ~alpha around the
    // mirror direction, and one at the normal.
    const Vec3 wo = view_from_cos(cos_nv);
    const double width = std::max(model.alpha, 1e-3);
    std::vector<LtcParams> starts;
    if (warm_start != nullptr) {
        starts.push_back(*warm_start);
    }
    // A narrow lobe around r = (-sin, 0, cos) keeps its x column orthogonal
    // to r: a = w, d = w tan, and c = w / cos for the out-of-plane width.
    const double cos_v = std::max(wo.z, 0.05);
    const double tan_v = wo.x / cos_v;
    for (double w : {width, 2.0 * width}) {
        starts.push_back({w, -tan_v, w / cos_v, w * tan_v});
    }
    starts.push_back({width, -tan_v, width, 0.0});
    starts.push_back({width, 0.0, width, 0.0});

    LtcParams start = starts.front();
    double best = objective(start.as_array());
    for (const LtcParams& s : starts) {
        const double r = objective(s.as_array());
        if (r < best) {
            best = r;
            start = s;
        }
    }

    const std::array<double, 4> x0 = start.as_array();
    std::array<double, 4> step{};
    for (std::size_t i = 0; i < 4; ++i) {
        step[i] = 0.1 * std::max(std::abs(x0[i]), 0.5 * width);
    }
    const auto nm = detail::nelder_mead<4>(objective, x0, step, options.max_iterations, 1e-6);

    FitResult result;
    result.params = to_params(nm.x);
    result.residual = nm.value;
    result.iterations = nm.iterations;
    result.converged = nm.converged && std::isfinite(nm.value);
    return result;
}

// ---------------------------------------------------------------------------
// Table

LtcTable::LtcTable(NdfKind kind, int resolution) : kind_(kind), resolution_(resolution)
{
    if (resolution < 2) {
        throw std::invalid_argument("table resolution must be at least 2");
    }
    cells_.resize(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
}

LtcTable::LtcTable(NdfKind kind, int resolution, std::vector<LtcCell> cells)
    : kind_(kind), resolution_(resolution), cells_(std::move(cells))
{
    if (resolution < 2) {
        throw std::invalid_argument("table resolution must be at least 2");
    }
    if (cells_.size() != static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution)) {
        throw std::invalid_argument("table cell count does not match its resolution");
    }
}

double LtcTable::node_alpha(int ix) const
{
    const double x = static_cast<double>(ix) / (resolution_ - 1);
    return std::max(x * x, kTableMinAlpha);
}

double LtcTable::node_cos(int iy) const
{
    const double y = static_cast<double>(iy) / (resolution_ - 1);
    return std::max(y * y, kTableMinCos);
}

LtcLookup LtcTable::lookup(double alpha, double cos_nv) const
{
    const double last = resolution_ - 1;
    const double fx = std::clamp(std::sqrt(std::max(alpha, 0.0)) * last, 0.0, last);
    const double fy = std::clamp(std::sqrt(std::max(cos_nv, 0.0)) * last, 0.0, last);
    const int x0 = std::min(static_cast<int>(fx), resolution_ - 2);
    const int y0 = std::min(static_cast<int>(fy), resolution_ - 2);
    const double tx = fx - x0;
    const double ty = fy - y0;

    const LtcCell& c00 = cell(x0, y0);
    const LtcCell& c10 = cell(x0 + 1, y0);
    const LtcCell& c01 = cell(x0, y0 + 1);
    const LtcCell& c11 = cell(x0 + 1, y0 + 1);
    auto lerp2 = [&](float v00, float v10, float v01, float v11) {
        const double top = v00 + tx * (static_cast<double>(v10) - v00);
        const double bottom = v01 + tx * (static_cast<double>(v11) - v01);
        return top + ty * (bottom - top);
    };

    LtcLookup out;
    std::array<double, 4> brdf{};
    std::array<double, 4> ndf{};
    for (std::size_t k = 0; k < 4; ++k) {
        brdf[k] = lerp2(c00.brdf[k], c10.brdf[k], c01.brdf[k], c11.brdf[k]);
        ndf[k] = lerp2(c00.ndf[k], c10.ndf[k], c01.ndf[k], c11.ndf[k]);
    }
    out.brdf = to_params(brdf);
    out.ndf = to_params(ndf);
    out.fgd = lerp2(c00.fgd, c10.fgd, c01.fgd, c11.fgd);
    out.d_pr = lerp2(c00.d_pr, c10.d_pr, c01.d_pr, c11.d_pr);
    return out;
}

bool LtcTable::operator==(const LtcTable& o) const
{
    if (kind_ != o.kind_ || resolution_ != o.resolution_ || cells_.size() != o.cells_.size()) {
        return false;
    }
    return std::memcmp(cells_.data(), o.cells_.data(), cells_.size() * sizeof(LtcCell)) == 0;
}

namespace {

std::array<float, 4> to_float(const LtcParams& p)
{
    return {static_cast<float>(p.a), static_cast<float>(p.b), static_cast<float>(p.c), static_cast<float>(p.d)};
}

/// Fills one roughness column, walking from normal toward grazing view.
void bake_column(const MicrofacetModel& model, const LtcTable& layout, int ix, const FitOptions& options,
                 std::vector<LtcCell>& column, std::vector<std::string>& log, int& flagged)
{
    const int n = layout.resolution();
    column.assign(static_cast<std::size_t>(n), LtcCell{});
    for (LtcTarget target : {LtcTarget::BRDF, LtcTarget::NDF}) {
        std::vector<LtcParams> fitted(static_cast<std::size_t>(n));
        std::vector<bool> ok(static_cast<std::size_t>(n), true);
        const LtcParams* warm = nullptr;
        for (int iy = n - 1; iy >= 0; --iy) {
            const auto j = static_cast<std::size_t>(iy);
            const FitResult fit = fit_ltc(model, layout.node_cos(iy), target, options, warm);
            fitted[j] = fit.params;
            if (!fit.converged) {
                ok[j] = false;
                ++flagged;
                std::ostringstream msg;
                msg << "cell (" << ix << ", " << iy << ") " << (target == LtcTarget::BRDF ? "BRDF" : "NDF")
                    << " lobe did not converge in " << fit.iterations << " iterations (residual " << fit.residual
                    << ")";
                // Neighbour extrapolation replaces the fit only if it does better.
                LtcParams candidate = fit.params;
                if (iy + 2 < n && ok[j + 1] && ok[j + 2]) {
                    const auto p1 = fitted[j + 1].as_array();
                    const auto p2 = fitted[j + 2].as_array();
                    std::array<double, 4> e{};
                    for (std::size_t k = 0; k < 4; ++k) {
                        e[k] = 2.0 * p1[k] - p2[k];
                    }
                    candidate = to_params(e);
                } else if (iy + 1 < n) {
                    candidate = fitted[j + 1];
                }
                const double r = ltc_fit_residual(model, layout.node_cos(iy), target, candidate, options);
                if (r < fit.residual) {
                    fitted[j] = candidate;
                    msg << "; filled from neighbours (residual " << r << ")";
                } else {
                    msg << "; kept, neighbour fill was worse (residual " << r << ")";
                }
                log.push_back(msg.str());
            }
            warm = &fitted[j];
        }
        for (int iy = 0; iy < n; ++iy) {
            auto& cell = column[static_cast<std::size_t>(iy)];
            (target == LtcTarget::BRDF ? cell.brdf : cell.ndf) = to_float(fitted[static_cast<std::size_t>(iy)]);
        }
    }
    for (int iy = 0; iy < n; ++iy) {
        auto& cell = column[static_cast<std::size_t>(iy)];
        cell.fgd = static_cast<float>(fgd(model, layout.node_cos(iy)));
        cell.d_pr = static_cast<float>(d_pr(model, layout.node_cos(iy)));
    }
}

} // namespace

LtcTable bake_table(NdfKind kind, int resolution, Execution exec, BakeReport* report, const FitOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    LtcTable table(kind, resolution);
    const int n = resolution;
    std::vector<std::vector<LtcCell>> columns(static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> logs(static_cast<std::size_t>(n));
    std::vector<int> flagged(static_cast<std::size_t>(n), 0);

    auto run = [&](int ix) {
        const auto i = static_cast<std::size_t>(ix);
        const MicrofacetModel model(kind, table.node_alpha(ix));
        bake_column(model, table, ix, options, columns[i], logs[i], flagged[i]);
    };

    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int ix = 0; ix < n; ++ix) {
            run(ix);
        }
    } else {
        for (int ix = 0; ix < n; ++ix) {
            run(ix);
        }
    }

    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            table.cell(ix, iy) = columns[static_cast<std::size_t>(ix)][static_cast<std::size_t>(iy)];
        }
    }
    if (report != nullptr) {
        report->log.clear();
        report->flagged_cells = 0;
        for (int ix = 0; ix < n; ++ix) {
            const auto i = static_cast<std::size_t>(ix);
            report->log.insert(report->log.end(), logs[i].begin(), logs[i].end());
            report->flagged_cells += flagged[i];
        }
        report->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return table;
}

// ---------------------------------------------------------------------------
// GLTB serialization

namespace {

constexpr char kMagic[4] = {'G', 'L', 'T', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& out, T value)
{
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xffu));
    }
}

template <class T>
T get_le(std::istream& in)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            throw std::runtime_error("table file is truncated");
        }
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return static_cast<T>(v);
}

void put_float(std::ostream& out, float f) { put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f)); }
float get_float(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }

} // namespace

void write_table(const LtcTable& table, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open table file for writing: " + path.string());
    }
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint8_t>(out, table.kind() == NdfKind::GGX ? 0 : 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.resolution()));
    for (const LtcCell& c : table.cells()) {
        for (float v : c.brdf) {
            put_float(out, v);
        }
        for (float v : c.ndf) {
            put_float(out, v);
        }
        put_float(out, c.fgd);
        put_float(out, c.d_pr);
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing table file: " + path.string());
    }
}

LtcTable read_table(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open table file: " + path.string());
    }
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("bad table magic in " + path.string());
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kVersion) {
        throw std::runtime_error("unsupported table version " + std::to_string(version));
    }
    const auto model = get_le<std::uint8_t>(in);
    if (model > 1) {
        throw std::runtime_error("unknown model id in table file");
    }
    const auto n = get_le<std::uint32_t>(in);
    if (n < 2 || n > 4096) {
        throw std::runtime_error("implausible table resolution " + std::to_string(n));
    }
    std::vector<LtcCell> cells(static_cast<std::size_t>(n) * n);
    for (LtcCell& c : cells) {
        for (float& v : c.brdf) {
            v = get_float(in);
        }
        for (float& v : c.ndf) {
            v = get_float(in);
        }
        c.fgd = get_float(in);
        c.d_pr = get_float(in);
    }
    return LtcTable(model == 0 ? NdfKind::GGX : NdfKind::Beckmann, static_cast<int>(n), std::move(cells));
}

// ---------------------------------------------------------------------------
// Shading

LtcAreaTerms ltc_area_terms(const LtcTable& table, const FresnelF0& f0, const Rgb& radiance,
                            std::span<const Vec3> poly, double cos_nv, double alpha, bool use_ndf_lobe)
{
    const LtcLookup entry = table.lookup(alpha, cos_nv);
    const double fraction = integrate_ltc_polygon(LtcLobe(entry.brdf), poly);
    const double ndf_fraction =
        use_ndf_lobe ? integrate_ltc_polygon(LtcLobe(entry.ndf, LtcTarget::NDF), poly) : fraction;
    LtcAreaTerms out;
    if (fraction > 0.0) {
        out.radiance = radiance * fresnel_schlick(f0, cos_nv) * (entry.fgd * fraction);
    }
    out.integrated_ndf = entry.d_pr * ndf_fraction;
    return out;
}

Rgb smooth_radiance_area(const LtcTable& table, const FresnelF0& f0, const Rgb& radiance, std::span<const Vec3> poly,
                         double cos_nv, double alpha)
{
    return ltc_area_terms(table, f0, radiance, poly, cos_nv, alpha).radiance;
}

double integrated_ndf_area(const LtcTable& table, std::span<const Vec3> poly, double cos_nv, double alpha,
                           bool use_ndf_lobe)
{
    const LtcLookup entry = table.lookup(alpha, cos_nv);
    const LtcLobe lobe(use_ndf_lobe ? entry.ndf : entry.brdf, use_ndf_lobe ? LtcTarget::NDF : LtcTarget::BRDF);
    return entry.d_pr * integrate_ltc_polygon(lobe, poly);
}

} // namespace glintlab
