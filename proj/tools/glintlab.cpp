// SPDX-License-Identifier: Apache-2.0
//
// glintlab command line: table baking, rendering and experiment runners.

#include "glintlab/experiments.hpp"
#include "glintlab/render.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace glintlab;

namespace {

struct SceneArgs {
    std::string scene_path;
    double light_size = 5.0;
    double elevation = 45.0;
    int width = 128;
    int height = 128;
    std::string model = "ggx";
    double roughness = 0.5;
    double density = 1e6;

    void add(CLI::App* app)
    {
        app->add_option("--scene", scene_path, "Scene JSON; when omitted a default plane + quad scene is used");
        app->add_option("--light-size", light_size, "Default scene: quad light side length")->check(CLI::PositiveNumber);
        app->add_option("--elevation", elevation, "Default scene: camera elevation in degrees")
            ->check(CLI::Range(1.0, 89.0));
        app->add_option("--width", width, "Default scene: image width")->check(CLI::Range(1, 65536));
        app->add_option("--height", height, "Default scene: image height")->check(CLI::Range(1, 65536));
        app->add_option("--model", model, "Default scene: ggx or beckmann");
        app->add_option("--roughness", roughness, "Default scene: perceptual roughness sqrt(alpha)")
            ->check(CLI::Range(1e-3, 1.0));
        app->add_option("--density", density, "Default scene: microfacets per unit UV area")
            ->check(CLI::PositiveNumber);
    }

    Scene load() const
    {
        if (!scene_path.empty()) {
            return load_scene(scene_path);
        }
        Scene s = default_scene(light_size, elevation, width, height);
        s.surface = GlintSurface(MicrofacetModel::from_perceptual(parse_ndf_kind(model), roughness), FresnelF0(1.0),
                                 density, 0);
        return s;
    }
};

void ensure_parent(const fs::path& p)
{
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
}

void write_both(const Image& img, const fs::path& pfm, const Scene& scene)
{
    ensure_parent(pfm);
    write_image(img, pfm, ImageFormat::Pfm);
    fs::path ppm = pfm;
    ppm.replace_extension(".ppm");
    write_image(img, ppm, ImageFormat::Ppm, {scene.render.exposure, scene.render.tonemap});
    std::cout << "wrote " << pfm.string() << " and " << ppm.string() << "\n";
}

void write_csv(const CsvTable& t, const fs::path& path)
{
    ensure_parent(path);
    t.write(path);
    std::cout << "wrote " << path.string() << "\n";
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) {
            throw std::invalid_argument("bad number '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list");
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"glintlab: glint shading under area lights"};
    app.require_subcommand(1);

    // bake
    auto* bake = app.add_subcommand("bake", "Fit and write an LTC table");
    std::string bake_model = "ggx";
    int bake_res = 64;
    std::string bake_out;
    std::string bake_log;
    bool bake_serial = false;
    bake->add_option("--model", bake_model, "ggx or beckmann");
    bake->add_option("--res", bake_res, "Grid resolution per axis")->check(CLI::Range(2, 4096));
    bake->add_option("--out", bake_out, "Output .gltb file")->required();
    bake->add_option("--log", bake_log, "Write the bake log (flagged cells) to this file");
    bake->add_flag("--serial", bake_serial, "Use the serial reference path");

    // render
    auto* rend = app.add_subcommand("render", "Render a scene");
    std::string scene_path;
    std::string table_path;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
    std::string ppm_path;
    rend->add_option("--scene", scene_path, "Scene JSON")->required();
    rend->add_option("--table", table_path, "LTC table (.gltb)");
    rend->add_option("--mode", mode, "smooth_ltc | smooth_mc | glint | glint_baseline | oracle");
    rend->add_option("--seed", seed, "Seed for counts and Monte-Carlo streams (default: surface seed)")
        ->each([&](const std::string&) { seed_given = true; });
    rend->add_option("--out", out_path, "Output image (.pfm or .ppm)")->required();
    rend->add_option("--png-out,--ppm-out", ppm_path, "Additional tonemapped 8-bit PPM");

    // experiments
    auto* exp = app.add_subcommand("experiment", "Run an experiment");
    exp->require_subcommand(1);

    auto* conv = exp->add_subcommand("convergence", "Glint renders with N_P x4 per strip vs the smooth render");
    SceneArgs conv_scene;
    conv_scene.add(conv);
    std::string conv_table;
    int conv_levels = 4;
    double conv_base = 1.0;
    std::uint64_t conv_seed = 1;
    std::string conv_out = "convergence";
    conv->add_option("--table", conv_table)->required();
    conv->add_option("--levels", conv_levels)->check(CLI::Range(2, 20));
    conv->add_option("--base-scale", conv_base, "Density multiplier of the first strip")->check(CLI::PositiveNumber);
    conv->add_option("--seed", conv_seed);
    conv->add_option("--out-dir", conv_out);

    auto* sub = exp->add_subcommand("subdivision", "Whole vs subdivided light with multinomial counts");
    SceneArgs sub_scene;
    sub_scene.add(sub);
    std::string sub_table;
    int sub_k = 256;
    int sub_seeds = 100;
    std::string sub_variant = "ltc";
    std::string sub_out = "subdivision";
    sub->add_option("--table", sub_table, "Required for the ltc variant");
    sub->add_option("--splits", sub_k, "Number of patches K (perfect square)");
    sub->add_option("--seeds", sub_seeds)->check(CLI::Range(1, 100000));
    sub->add_option("--variant", sub_variant, "ltc or mc (stratified quadrature per patch)");
    sub->add_option("--out-dir", sub_out);

    auto* mr = exp->add_subcommand("match-r", "Tabulate the R matching the cap probability at normal incidence");
    std::string mr_gamma = "0.26,5";
    std::string mr_rough = "0.1,0.5,0.9";
    std::string mr_model = "ggx";
    std::string mr_out = "match_r.csv";
    mr->add_option("--gamma", mr_gamma, "Comma-separated half-angles in degrees");
    mr->add_option("--roughness", mr_rough, "Comma-separated perceptual roughness values");
    mr->add_option("--model", mr_model);
    mr->add_option("--out", mr_out);

    auto* abl = exp->add_subcommand("ablation", "MC/LTC combinations for Lo and p");
    SceneArgs abl_scene;
    abl_scene.add(abl);
    std::string abl_table;
    std::uint64_t abl_seed = 1;
    std::string abl_out = "ablation";
    abl->add_option("--table", abl_table)->required();
    abl->add_option("--seed", abl_seed);
    abl->add_option("--out-dir", abl_out);

    CLI11_PARSE(app, argc, argv);

    try {
        const int threads = configure_threads_from_env();

        if (*bake) {
            const NdfKind kind = parse_ndf_kind(bake_model);
            BakeReport report;
            const LtcTable table =
                bake_table(kind, bake_res, bake_serial ? Execution::Serial : Execution::Parallel, &report);
            const fs::path out(bake_out);
            ensure_parent(out);
            write_table(table, out);
            if (!bake_log.empty()) {
                std::ofstream log(bake_log);
                for (const auto& line : report.log) {
                    log << line << "\n";
                }
                if (!log) {
                    throw std::runtime_error("failed writing bake log " + bake_log);
                }
            }
            std::cout << "baked " << to_string(kind) << " table " << bake_res << "x" << bake_res << " in "
                      << report.seconds << " s (" << threads << " threads), " << report.flagged_cells
                      << " flagged fits\n";
            return 0;
        }

        if (*rend) {
            Scene scene = load_scene(scene_path);
            if (!mode.empty()) {
                scene.render.mode = parse_render_mode(mode);
            }
            const std::uint64_t s = seed_given ? seed : scene.surface.seed;
            std::optional<LtcTable> table;
            if (!table_path.empty()) {
                table = read_table(table_path);
            }
            RenderStats stats;
            const auto t0 = std::chrono::steady_clock::now();
            const Image img = render(scene, table ? &*table : nullptr, s, Execution::Parallel, &stats);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const fs::path out(out_path);
            ensure_parent(out);
            const PpmOptions ppm{scene.render.exposure, scene.render.tonemap};
            write_image(img, out, format_from_path(out), ppm);
            if (!ppm_path.empty()) {
                ensure_parent(ppm_path);
                write_image(img, ppm_path, ImageFormat::Ppm, ppm);
            }
            std::cout << "rendered " << img.width() << "x" << img.height() << " (" << to_string(scene.render.mode)
                      << ") in " << secs << " s; " << stats.clipped << " clipped probabilities (max unclamped "
                      << stats.max_unclamped_p << ")\n";
            return 0;
        }

        if (*conv) {
            const Scene scene = conv_scene.load();
            const LtcTable table = read_table(conv_table);
            const auto r = experiment_convergence(scene, table, conv_levels, conv_seed, conv_base);
            const fs::path dir(conv_out);
            write_both(r.strips, dir / "strips.pfm", scene);
            write_both(r.smooth, dir / "smooth.pfm", scene);
            write_csv(r.csv(), dir / "convergence.csv");
            std::cout << r.csv().str();
            return 0;
        }

        if (*sub) {
            const Scene scene = sub_scene.load();
            SubdivisionVariant variant;
            if (sub_variant == "ltc") {
                variant = SubdivisionVariant::Ltc;
            } else if (sub_variant == "mc") {
                variant = SubdivisionVariant::Stratified;
            } else {
                throw std::invalid_argument("--variant must be ltc or mc");
            }
            std::optional<LtcTable> table;
            if (!sub_table.empty()) {
                table = read_table(sub_table);
            } else if (variant == SubdivisionVariant::Ltc) {
                throw std::invalid_argument("--table is required for the ltc variant");
            }
            const auto r = experiment_subdivision(scene, table ? &*table : nullptr, sub_k, sub_seeds, variant);
            const fs::path dir(sub_out);
            write_both(r.whole, dir / "whole.pfm", scene);
            write_both(r.subdivided, dir / "subdivided.pfm", scene);
            write_csv(r.csv(), dir / "subdivision.csv");
            std::cout << r.csv().str();
            return 0;
        }

        if (*mr) {
            const auto rows = experiment_match_r(parse_list(mr_gamma), parse_list(mr_rough), parse_ndf_kind(mr_model));
            const CsvTable t = match_r_csv(rows);
            write_csv(t, mr_out);
            std::cout << t.str();
            return 0;
        }

        if (*abl) {
            const Scene scene = abl_scene.load();
            const LtcTable table = read_table(abl_table);
            const auto r = experiment_ablation(scene, table, abl_seed);
            const fs::path dir(abl_out);
            write_both(r.grid, dir / "grid.pfm", scene);
            write_both(r.ltc_lo_ndf_ltc_p, dir / "ndf_ltc.pfm", scene);
            write_csv(r.csv(), dir / "ablation.csv");
            std::cout << r.csv().str();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "glintlab: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
