// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/render.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace glintlab {

/// Comparison of an image against a reference over pixels where the
/// reference exceeds `threshold` times its maximum (channel average).
struct ImageComparison {
    double relative_rms = 0.0;   ///< sqrt(mean(((a - r) / r)^2))
    double mean_a = 0.0;
    double mean_ref = 0.0;
    std::uint64_t pixels = 0;
};

ImageComparison compare_images(const Image& a, const Image& ref, double threshold = 1e-3);

/// Simple CSV table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(const std::filesystem::path& path) const;
    std::string str() const;
};

struct ConvergenceLevel {
    int level = 0;
    double density_scale = 1.0;
    double mean_count = 0.0;         ///< mean N_P over shaded pixels
    double mean_expected_hits = 0.0; ///< mean N_P * p over shaded pixels, first light
    ImageComparison vs_smooth;
};

struct ConvergenceResult {
    Image strips;
    Image smooth;
    std::vector<ConvergenceLevel> levels;
    CsvTable csv() const;
};

/// Renders `levels` glint images with the microfacet count scaled by 4 per
/// level, compares each with the smooth LTC render and assembles vertical
/// strips (level i in strip i). Throws for levels < 2.
ConvergenceResult experiment_convergence(const Scene& scene, const LtcTable& table, int levels, std::uint64_t seed,
                                         double base_scale = 1.0);

enum class SubdivisionVariant { Ltc, Stratified };

struct SubdivisionResult {
    int split = 1;                 ///< patches per side; K = split^2
    int seeds = 0;
    bool first_seed_identical = false;
    double mean_difference = 0.0;  ///< image mean of (subdivided - whole), averaged over seeds
    double mean_difference_se = 0.0;
    double fraction_z_above_3 = 0.0;  ///< pixels whose mean difference exceeds 3 standard errors
    double relative_rms_difference = 0.0;  ///< per-seed relative RMS difference, averaged
    double rms_difference = 0.0;           ///< per-seed RMS of (subdivided - whole), averaged
    double max_abs_difference = 0.0;
    Image whole;                   ///< first seed
    Image subdivided;              ///< first seed
    CsvTable csv() const;
};

/// Renders each seed with the whole light and with the light subdivided
/// into k_splits patches sharing multinomially split counts. k_splits must
/// be a perfect square.
SubdivisionResult experiment_subdivision(const Scene& scene, const LtcTable* table, int k_splits, int seeds,
                                         SubdivisionVariant variant, std::uint64_t first_seed = 1);

struct MatchRRow {
    double gamma_deg = 0.0;
    double roughness = 0.0;   ///< perceptual, sqrt(alpha)
    double R = 0.0;
    double p_cap_unclamped = 0.0;  ///< cap probability at normal incidence
};

std::vector<MatchRRow> experiment_match_r(const std::vector<double>& gamma_deg, const std::vector<double>& roughness,
                                          NdfKind kind = NdfKind::GGX);
CsvTable match_r_csv(const std::vector<MatchRRow>& rows);

struct AblationResult {
    Image mc_lo_mc_p;
    Image mc_lo_ltc_p;
    Image ltc_lo_mc_p;
    Image ltc_lo_ltc_p;
    Image ltc_lo_ndf_ltc_p;   ///< separately fitted NDF lobe for p
    Image grid;               ///< 2 x 2 composite: rows Lo (MC, LTC), columns p (MC, LTC)
    CsvTable csv() const;
};

AblationResult experiment_ablation(const Scene& scene, const LtcTable& table, std::uint64_t seed);

/// Places images side by side in a cols x rows grid (all the same size).
Image tile_images(const std::vector<const Image*>& images, int cols);

} // namespace glintlab
