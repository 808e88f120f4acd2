// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/geom.hpp"
#include "glintlab/microfacet.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace glintlab {

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

    Vec3 operator*(const Vec3& v) const
    {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(double s) const
    {
        Mat3 r = *this;
        for (double& v : r.m) {
            v *= s;
        }
        return r;
    }

    double determinant() const;
    Mat3 inverse() const;
};

enum class LtcTarget { BRDF, NDF };

/// Isotropic LTC parameters for the sparsity [[a,0,b],[0,c,0],[d,0,1]].
struct LtcParams {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
    double d = 0.0;

    Mat3 matrix() const { return Mat3{{a, 0.0, b, 0.0, c, 0.0, d, 0.0, 1.0}}; }
    std::array<double, 4> as_array() const { return {a, b, c, d}; }
};

/// Clamped cosine warped by a 3x3 matrix, expressed in the shading frame
/// (normal = +z, view in the xz-plane). Construction throws
/// std::invalid_argument for singular matrices.
class LtcLobe {
public:
    explicit LtcLobe(const Mat3& m, LtcTarget target = LtcTarget::BRDF);
    explicit LtcLobe(const LtcParams& p, LtcTarget target = LtcTarget::BRDF) : LtcLobe(p.matrix(), target) {}

    const Mat3& matrix() const { return m_; }
    const Mat3& inverse() const { return inv_; }
    double inverse_determinant() const { return det_inv_; }
    LtcTarget target() const { return target_; }

private:
    Mat3 m_;
    Mat3 inv_;
    double det_inv_;
    LtcTarget target_;
};

/// Density of the lobe at unit direction w (integrates to 1 over the sphere).
double ltc_eval(const LtcLobe& lobe, const Vec3& w);

/// Direction distributed with the lobe density, from two uniforms.
Vec3 ltc_sample(const LtcLobe& lobe, double u1, double u2);

/// Fraction of the lobe inside the polygon: vertices are mapped through the
/// inverse matrix, clipped to the upper hemisphere and integrated with the
/// analytic edge formula. Result in [0, 1].
double integrate_ltc_polygon(const LtcLobe& lobe, const SphericalPolygon& poly);

/// Same, for raw (not necessarily unit) vertex directions of a convex polygon.
double integrate_ltc_polygon(const LtcLobe& lobe, std::span<const Vec3> vertices);

/// Clamped-cosine irradiance fraction (1/pi) * integral of max(z, 0) over a
/// convex polygon given by direction vectors, with horizon clipping.
double clamped_cosine_polygon(std::span<const Vec3> vertices);

struct FitOptions {
    int max_iterations = 200;
    int grid = 32;
};

struct FitResult {
    LtcParams params;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Normalized target density for fitting, in the shading frame with the
/// view wo = (sin, 0, cos).
double ltc_target_density(const MicrofacetModel& model, const Vec3& wo, LtcTarget target, double normalization,
                          const Vec3& wi);

/// Estimated L2 error between the lobe and the normalized target over the
/// fixed stratified direction set.
double ltc_fit_residual(const MicrofacetModel& model, double cos_nv, LtcTarget target, const LtcParams& params,
                        const FitOptions& options = {});

/// Nelder-Mead fit of an isotropic lobe. When `warm_start` is given the
/// simplex starts there, otherwise from a lobe centred on the mirror direction.
FitResult fit_ltc(const MicrofacetModel& model, double cos_nv, LtcTarget target, const FitOptions& options = {},
                  const LtcParams* warm_start = nullptr);

/// One table record. Stored in single precision, exactly as serialized.
struct LtcCell {
    std::array<float, 4> brdf{1, 0, 1, 0};
    std::array<float, 4> ndf{1, 0, 1, 0};
    float fgd = 1.0f;
    float d_pr = 1.0f;
};

/// Interpolated table values at one (alpha, cos_nv).
struct LtcLookup {
    LtcParams brdf;
    LtcParams ndf;
    double fgd = 1.0;
    double d_pr = 1.0;
};

/// Table grid: x = sqrt(alpha) and y = sqrt(cos_nv), both sampled uniformly
/// on [0, 1] at `resolution` points. The evaluated alpha and cosine are
/// clamped from below to kTableMinAlpha / kTableMinCos.
inline constexpr double kTableMinAlpha = 0.0025;
inline constexpr double kTableMinCos = 1e-3;

class LtcTable {
public:
    LtcTable(NdfKind kind, int resolution);
    LtcTable(NdfKind kind, int resolution, std::vector<LtcCell> cells);

    NdfKind kind() const { return kind_; }
    int resolution() const { return resolution_; }

    const LtcCell& cell(int ix, int iy) const { return cells_[index(ix, iy)]; }
    LtcCell& cell(int ix, int iy) { return cells_[index(ix, iy)]; }
    const std::vector<LtcCell>& cells() const { return cells_; }

    /// alpha and cos_nv evaluated at grid node (ix, iy).
    double node_alpha(int ix) const;
    double node_cos(int iy) const;

    /// Bilinear lookup, clamped at the table edges.
    LtcLookup lookup(double alpha, double cos_nv) const;

    bool operator==(const LtcTable&) const;

private:
    std::size_t index(int ix, int iy) const
    {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution_) + static_cast<std::size_t>(ix);
    }

    NdfKind kind_;
    int resolution_;
    std::vector<LtcCell> cells_;
};

enum class Execution { Serial, Parallel };

struct BakeReport {
    std::vector<std::string> log;
    int flagged_cells = 0;
    double seconds = 0.0;
};

/// Fits BRDF and NDF lobes and computes FGD and D_PR for every cell. Columns
/// of constant roughness are independent; inside a column each fit is warm
/// started from the previous cell (from normal toward grazing view). Both
/// execution modes produce identical tables.
LtcTable bake_table(NdfKind kind, int resolution, Execution exec = Execution::Parallel, BakeReport* report = nullptr,
                    const FitOptions& options = {});

/// Little-endian "GLTB" table file.
void write_table(const LtcTable& table, const std::filesystem::path& path);
LtcTable read_table(const std::filesystem::path& path);

/// Smooth radiance of a polygonal light of constant radiance, in the shading
/// frame. Fresnel is a single Schlick evaluation at cos_nv (the mirror
/// configuration h = n).
Rgb smooth_radiance_area(const LtcTable& table, const FresnelF0& f0, const Rgb& radiance, std::span<const Vec3> poly,
                         double cos_nv, double alpha);

/// Smooth radiance and integrated NDF of one polygon from a single lookup;
/// with the BRDF lobe both share one polygon integral.
struct LtcAreaTerms {
    Rgb radiance;
    double integrated_ndf = 0.0;
};

LtcAreaTerms ltc_area_terms(const LtcTable& table, const FresnelF0& f0, const Rgb& radiance,
                            std::span<const Vec3> poly, double cos_nv, double alpha, bool use_ndf_lobe = false);

/// Integrated NDF over the light directions of a polygon: D_PR times the
/// LTC fraction, using the BRDF lobe or the separately fitted NDF lobe.
double integrated_ndf_area(const LtcTable& table, std::span<const Vec3> poly, double cos_nv, double alpha,
                           bool use_ndf_lobe = false);

} // namespace glintlab
