// SPDX-License-Identifier: Apache-2.0

#include "glintlab/microfacet.hpp"

#include "glintlab/geom.hpp"
#include "glintlab/quadrature.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <stdexcept>
#include <string>

namespace glintlab {

std::string_view to_string(NdfKind kind)
{
    return kind == NdfKind::GGX ? "ggx" : "beckmann";
}

NdfKind parse_ndf_kind(std::string_view name)
{
    if (name == "ggx" || name == "GGX") {
        return NdfKind::GGX;
    }
    if (name == "beckmann" || name == "Beckmann") {
        return NdfKind::Beckmann;
    }
    throw std::invalid_argument("unknown NDF model '" + std::string(name) + "'");
}

MicrofacetModel::MicrofacetModel(NdfKind kind_, double alpha_) : kind(kind_), alpha(alpha_)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::domain_error("roughness alpha must lie in (0, 1]");
    }
}

MicrofacetModel MicrofacetModel::from_perceptual(NdfKind kind, double roughness)
{
    return MicrofacetModel(kind, roughness * roughness);
}

FresnelF0::FresnelF0(const Rgb& v) : value(v)
{
    for (double c : {v.r, v.g, v.b}) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw std::domain_error("F0 components must lie in [0, 1]");
        }
    }
}

double ndf_eval(const MicrofacetModel& model, double cos_nh)
{
    if (cos_nh <= 0.0) {
        return 0.0;
    }
    const double a2 = model.alpha * model.alpha;
    const double c2 = cos_nh * cos_nh;
    if (model.kind == NdfKind::GGX) {
        const double denom = c2 * (a2 - 1.0) + 1.0;
        return a2 / (kPi * denom * denom);
    }
    const double tan2 = (1.0 - c2) / c2;
    return std::exp(-tan2 / a2) / (kPi * a2 * c2 * c2);
}

double smith_lambda(const MicrofacetModel& model, double cos_theta)
{
    if (cos_theta >= 1.0) {
        return 0.0;
    }
    const double c2 = cos_theta * cos_theta;
    const double tan2 = (1.0 - c2) / c2;
    if (model.kind == NdfKind::GGX) {
        return 0.5 * (std::sqrt(1.0 + model.alpha * model.alpha * tan2) - 1.0);
    }
    const double a = 1.0 / (model.alpha * std::sqrt(tan2));
    if (a > 26.0) {
        return 0.0;
    }
    return 0.5 * (std::exp(-a * a) / (a * std::sqrt(kPi)) - boost::math::erfc(a));
}

double smith_g(const MicrofacetModel& model, double cos_nv, double cos_nl)
{
    if (cos_nv <= 0.0 || cos_nl <= 0.0) {
        return 0.0;
    }
    return 1.0 / (1.0 + (smith_lambda(model, cos_nv) + smith_lambda(model, cos_nl)));
}

Rgb fresnel_schlick(const FresnelF0& f0, double cos_theta)
{
    const double m = clamp01(1.0 - cos_theta);
    const double w = (m * m) * (m * m) * m;
    const Rgb& f = f0.value;
    return {f.r + (1.0 - f.r) * w, f.g + (1.0 - f.g) * w, f.b + (1.0 - f.b) * w};
}

Rgb brdf_eval(const MicrofacetModel& model, const FresnelF0& f0, const Vec3& wi, const Vec3& wo, const Vec3& n)
{
    const double cos_nv = dot(n, wo);
    const double cos_nl = dot(n, wi);
    if (cos_nv <= 0.0 || cos_nl <= 0.0) {
        return {};
    }
    // Written so that swapping wi and wo gives bit-identical results.
    const Vec3 h = normalize(wi + wo);
    const double d = ndf_eval(model, dot(n, h));
    const double g = smith_g(model, cos_nv, cos_nl);
    const Rgb f = fresnel_schlick(f0, 0.5 * (dot(wi, h) + dot(wo, h)));
    return f * (g * d / (4.0 * (cos_nv * cos_nl)));
}

double brdf_cos_unit_fresnel(const MicrofacetModel& model, const Vec3& wi, const Vec3& wo)
{
    if (wo.z <= 0.0 || wi.z <= 0.0) {
        return 0.0;
    }
    const Vec3 h = normalize(wi + wo);
    return smith_g(model, wo.z, wi.z) * ndf_eval(model, h.z) / (4.0 * wo.z);
}

double ndf_light_density(const MicrofacetModel& model, const Vec3& wi, const Vec3& wo)
{
    if (wo.z <= 0.0 || wi.z <= 0.0) {
        return 0.0;
    }
    const Vec3 h = normalize(wi + wo);
    return ndf_eval(model, h.z) / (4.0 * dot(h, wi));
}

double total_microfacet_area(const MicrofacetModel& model)
{
    const double a = model.alpha;
    if (model.kind == NdfKind::Beckmann) {
        // The fit is a quadratic in alpha^2; read in alpha it is off by up to 0.1.
        const double a2 = a * a;
        return 1.0 + 0.466 * a2 - 0.091 * a2 * a2;
    }
    const double k = 1.0 - a * a;
    const double s = std::sqrt(k);
    if (s < 1e-4) {
        // atanh(s)/s = 1 + k/3 + k^2/5 + O(k^3)
        return 1.0 + a * a * (1.0 + k / 3.0 + k * k / 5.0);
    }
    return 1.0 + a * a * std::log((1.0 + s) / a) / s;
}

double erfcx(double x)
{
    if (x < 25.0) {
        return std::exp(x * x) * boost::math::erfc(x);
    }
    // Asymptotic expansion; the truncation error is below 1e-15 for x >= 25.
    const double inv2 = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 8; ++n) {
        term *= -(2.0 * n - 1.0) * inv2;
        sum += term;
    }
    return sum / (x * std::sqrt(kPi));
}

double beckmann_total_area_exact(double alpha)
{
    return 1.0 + 0.5 * std::sqrt(kPi) * alpha * erfcx(1.0 / alpha);
}

namespace {

/// Azimuth half-width of the microfacet normals at polar angle theta_h whose
/// mirror direction of the view (polar angle theta_v, azimuth 0) lies above
/// the horizon. The valid set is |phi| < result.
double valid_azimuth(double theta_h, double sin_v, double cos_v)
{
    const double s2 = std::sin(2.0 * theta_h);
    const double c2 = std::cos(2.0 * theta_h);
    if (sin_v < 1e-12 || s2 < 1e-15) {
        return c2 > 0.0 ? kPi : 0.0;
    }
    const double threshold = -cos_v * c2 / (sin_v * s2);
    if (threshold <= -1.0) {
        return kPi;
    }
    if (threshold >= 1.0) {
        return 0.0;
    }
    return std::acos(threshold);
}

/// Integrates f(h) over the microfacet normals that reflect the view into
/// the upper hemisphere. Adaptive in the polar angle, Gauss-Legendre in azimuth.
template <class F>
double integrate_reflecting_normals(const MicrofacetModel& model, double cos_nv, F&& f)
{
    const double cos_v = std::clamp(cos_nv, 0.0, 1.0);
    const double sin_v = std::sqrt(1.0 - cos_v * cos_v);
    const double theta_v = std::acos(cos_v);
    const double theta_max = 0.25 * kPi + 0.5 * theta_v;
    const Vec3 wo{sin_v, 0.0, cos_v};

    auto ring = [&](double theta_h) {
        const double phi_max = valid_azimuth(theta_h, sin_v, cos_v);
        if (phi_max <= 0.0) {
            return 0.0;
        }
        const double st = std::sin(theta_h);
        const double ct = std::cos(theta_h);
        auto along_phi = [&](double phi) {
            const Vec3 h{st * std::cos(phi), st * std::sin(phi), ct};
            return f(h, wo);
        };
        // Symmetric about phi = 0.
        return 2.0 * quad::legendre64(along_phi, 0.0, phi_max) * st;
    };

    std::vector<double> breaks;
    for (double scale : {1.0, 4.0, 16.0}) {
        breaks.push_back(std::atan(scale * model.alpha));
    }
    breaks.push_back(std::max(0.0, 0.25 * kPi - 0.5 * theta_v));
    std::sort(breaks.begin(), breaks.end());
    return quad::adaptive_split(ring, 0.0, theta_max, breaks, 1e-9, 8);
}

} // namespace

double fgd(const MicrofacetModel& model, double cos_nv)
{
    return integrate_reflecting_normals(model, cos_nv, [&](const Vec3& h, const Vec3& wo) {
        const double h_dot_v = dot(h, wo);
        const Vec3 wi = reflect(wo, h);
        // f_r cos dwi = G D / (4 n.v) * 4 (h.v) dh
        return smith_g(model, wo.z, wi.z) * ndf_eval(model, h.z) * h_dot_v / wo.z;
    });
}

double d_pr(const MicrofacetModel& model, double cos_nv)
{
    return integrate_reflecting_normals(model, cos_nv, [&](const Vec3& h, const Vec3&) {
        return ndf_eval(model, h.z);
    });
}

namespace {

Vec3 from_tan2(double tan2, double phi)
{
    const double cos_t = 1.0 / std::sqrt(1.0 + tan2);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

/// GGX mass of normals with cos(theta) in [0, x]: the antiderivative of
/// 2 a^2 / (1 - k x^2)^2 with k = 1 - a^2.
double ggx_partial_area(double alpha, double x)
{
    const double a2 = alpha * alpha;
    const double k = 1.0 - a2;
    const double y = 1.0 - x;
    const double denom = a2 + k * y * (2.0 - y);
    const double s = std::sqrt(k);
    double atanh_term;
    if (s < 1e-4) {
        const double kx2 = k * x * x;
        atanh_term = x * (1.0 + kx2 / 3.0 + kx2 * kx2 / 5.0);
    } else {
        atanh_term = std::atanh(s * x) / s;
    }
    return a2 * (x / denom + atanh_term);
}

} // namespace

Vec3 sample_ndf(const MicrofacetModel& model, Rng& rng)
{
    const double a = model.alpha;
    if (model.kind == NdfKind::Beckmann) {
        // u = tan^2(theta) has density proportional to exp(-u/a^2) sqrt(1+u).
        // Envelope exp(-u/a^2)(1 + u/2) is a mixture of Exp and Gamma(2).
        const double a2 = a * a;
        const double w_exp = 1.0 / (1.0 + 0.5 * a2);
        for (;;) {
            double u;
            if (rng.uniform() < w_exp) {
                u = -a2 * std::log(1.0 - rng.uniform());
            } else {
                u = -a2 * (std::log(1.0 - rng.uniform()) + std::log(1.0 - rng.uniform()));
            }
            if (rng.uniform() * (1.0 + 0.5 * u) <= std::sqrt(1.0 + u)) {
                return from_tan2(u, 2.0 * kPi * rng.uniform());
            }
        }
    }

    // GGX: invert the closed-form CDF over cos(theta) by safeguarded Newton.
    const double total = ggx_partial_area(a, 1.0);
    const double target = rng.uniform() * total;
    const double phi = 2.0 * kPi * rng.uniform();
    const double a2 = a * a;
    const double k = 1.0 - a2;
    double lo = 0.0;
    double hi = 1.0;
    double x = std::max(0.0, 1.0 - a2);
    for (int it = 0; it < 100; ++it) {
        const double g = ggx_partial_area(a, x) - target;
        if (g > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double y = 1.0 - x;
        const double denom = a2 + k * y * (2.0 - y);
        const double deriv = 2.0 * a2 / (denom * denom);
        double next = x - g / deriv;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-15 || hi - lo <= 1e-15) {
            x = next;
            break;
        }
        x = next;
    }
    const double sin_t = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), x};
}

Vec3 sample_ndf_cosine(const MicrofacetModel& model, double u1, double u2)
{
    const double a2 = model.alpha * model.alpha;
    const double tan2 = model.kind == NdfKind::GGX ? a2 * u1 / (1.0 - u1) : -a2 * std::log(1.0 - u1);
    return from_tan2(tan2, 2.0 * kPi * u2);
}

} // namespace glintlab
