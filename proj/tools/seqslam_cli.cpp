#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "seqslam/config.hpp"
#include "seqslam/csv.hpp"
#include "seqslam/error.hpp"
#include "seqslam/eval.hpp"
#include "seqslam/image_io.hpp"
#include "seqslam/pipeline.hpp"
#include "seqslam/synthetic.hpp"

namespace fs = std::filesystem;
using namespace seqslam;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Flat key = value config file");
    cmd->add_option("--out", args.out, "Run output directory")->required();
    for (std::string_view key : config_keys()) {
        const std::string name(key);
        cmd->add_option_function<std::string>(
            "--" + name, [&args, name](const std::string& v) { args.overrides[name] = v; },
            "Overrides '" + name + "' from the config file");
    }
}

RunConfig resolve(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = load_config(args.config_path);
    }
    for (const auto& [key, value] : args.overrides) {
        apply_setting(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

void print_report(const EvalReport& r, double threshold) {
    std::cout << "threshold " << format_real(threshold) << ": recall " << format_real(r.recall) << " ("
              << r.correct_count << "/" << r.total_frames << "), mean error " << format_real(r.mean_error_frames)
              << " frames, max " << format_real(r.max_error_frames) << ", false positives "
              << r.false_positive_count << '\n';
}

void write_synthetic(const fs::path& out, const std::string& kind, std::uint64_t seed, std::size_t frames) {
    synth::RouteParams params;
    params.seed = seed;
    params.reference_frames = frames;

    std::vector<GrayImage> reference;
    std::vector<GrayImage> query;
    GroundTruth truth;
    RunConfig cfg;
    if (kind == "day-night") {
        auto pair = synth::make_day_night_pair(params);
        reference = std::move(pair.reference);
        query = std::move(pair.query);
        truth = std::move(pair.truth);
    } else if (kind == "video") {
        // 15 fps video at one fifteenth of a reference step per frame, blurred output kept at 1 fps.
        auto route = synth::make_video_route(params, 1.0 / 15.0, 0.8, 2.0);
        reference = std::move(route.reference);
        query = std::move(route.video);
        truth = std::move(route.truth);
        cfg.exposures = {66, 500, 1000, 2000, 5000};
        cfg.source_fps = 15;
        cfg.blur_stride = 15;
        cfg.v_av = 1.0 / 15.0;
        cfg.sequence_length = 101;
    } else {
        throw ConfigError("unknown synthetic kind '" + kind + "' (day-night or video)");
    }

    auto write_dir = [](const fs::path& dir, const std::vector<GrayImage>& images) {
        fs::create_directories(dir);
        char name[32];
        for (std::size_t i = 0; i < images.size(); ++i) {
            std::snprintf(name, sizeof name, "%06zu.pgm", i);
            write_image(dir / name, images[i]);
        }
    };
    write_dir(out / "reference", reference);
    write_dir(out / "query", query);
    {
        std::ofstream gt(out / "ground_truth.csv");
        write_ground_truth(gt, truth);
    }
    cfg.reference_dir = (out / "reference").string();
    cfg.query_dir = (out / "query").string();
    cfg.ground_truth = (out / "ground_truth.csv").string();
    cfg.reference_spacing = truth.reference_spacing;
    cfg.query_spacing = truth.query_spacing;
    std::ofstream(out / "run.cfg") << serialize_config(cfg);
    std::cout << "wrote " << reference.size() << " reference and " << query.size() << " query frames to "
              << out.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence-based visual place recognition over low-resolution normalized images"};
    app.require_subcommand(1);

    CommonArgs pre_args, match_args, blur_args, rank_args, eval_args;
    auto* pre = app.add_subcommand("preprocess", "Build a template store from a frame directory");
    add_config_flags(pre, pre_args);

    auto* match = app.add_subcommand("match", "Match a query traverse against a reference traverse");
    add_config_flags(match, match_args);

    auto* blur = app.add_subcommand("blur-sweep", "Match temporally blurred queries for a list of exposures");
    add_config_flags(blur, blur_args);
    bool write_frames = false;
    blur->add_flag("--write-frames", write_frames, "Also write each blurred frame directory");

    auto* rank = app.add_subcommand("rank-analysis", "Rank single-image matches under four normalization variants");
    add_config_flags(rank, rank_args);

    auto* eval = app.add_subcommand("eval", "Score an existing match CSV against ground truth");
    add_config_flags(eval, eval_args);
    std::string matches_path;
    eval->add_option("--matches", matches_path, "Match CSV written by 'match'")->required();

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic route dataset with ground truth");
    std::string synth_out;
    std::string synth_kind = "day-night";
    std::uint64_t synth_seed = 7;
    std::size_t synth_frames = 600;
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--kind", synth_kind, "day-night or video");
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--frames", synth_frames, "Reference frame count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) {
            run_preprocess(resolve(pre_args), pre_args.out);
            std::cout << "wrote " << (fs::path(pre_args.out) / "templates.sqsm").string() << '\n';
        } else if (match->parsed()) {
            const auto outcome = run_match(resolve(match_args), match_args.out);
            std::cout << "v_av " << format_real(outcome.v_av) << ", " << outcome.run.matches.size()
                      << " sequence matches\n";
            if (outcome.report) {
                print_report(*outcome.report, outcome.threshold);
            }
        } else if (blur->parsed()) {
            for (const auto& row : run_blur_sweep(resolve(blur_args), blur_args.out, write_frames)) {
                std::cout << format_real(row.exposure_ms) << " ms (window " << row.window << ", expected lag "
                          << format_real(row.expected_lag) << ", measured " << format_real(row.measured_lag) << "): ";
                print_report(row.report, row.threshold);
            }
        } else if (rank->parsed()) {
            for (const auto& d : run_rank_analysis(resolve(rank_args), rank_args.out)) {
                std::cout << to_string(d.variant) << ": top-1 " << format_real(d.top1_rate()) << ", mean percentile "
                          << format_real(d.mean_percentile()) << '\n';
            }
        } else if (eval->parsed()) {
            const RunConfig cfg = resolve(eval_args);
            print_report(run_eval(cfg, matches_path, eval_args.out),
                         cfg.threshold.value_or(std::numeric_limits<double>::quiet_NaN()));
        } else if (synth_cmd->parsed()) {
            write_synthetic(synth_out, synth_kind, synth_seed, synth_frames);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NotReady& e) {
        std::cerr << "not ready: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
