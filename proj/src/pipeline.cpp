#include "seqslam/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "seqslam/blur.hpp"
#include "seqslam/csv.hpp"
#include "seqslam/error.hpp"
#include "seqslam/image_io.hpp"
#include "seqslam/imaging.hpp"

namespace seqslam {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void write_manifest(const fs::path& out_dir, std::string_view command, const RunConfig& cfg,
                    const std::vector<std::string>& notes = {}) {
    auto out = open_output(out_dir / "manifest.cfg");
    out << "# command: " << command << '\n';
    for (const auto& note : notes) {
        out << "# " << note << '\n';
    }
    out << serialize_config(cfg);
}

MatchParams params_from(const RunConfig& cfg, double v_av) {
    MatchParams p;
    p.patch_side = cfg.patch_side;
    p.sequence_length = cfg.sequence_length;
    p.half_window = cfg.half_window;
    p.slope = cfg.slope;
    p.slope.v_av = v_av;
    p.threads = cfg.threads;
    return p;
}

std::vector<GrayImage> load_dataset(const std::string& dir, const std::string& role) {
    if (dir.empty()) {
        throw ConfigError(role + " directory is not set");
    }
    auto frames = load_gray_frames(dir);
    if (frames.empty()) {
        throw IoError(role + " directory " + dir + " contains no frames");
    }
    return frames;
}

void require_frames(std::size_t have, std::size_t n, const std::string& role) {
    if (have < n) {
        throw NotReady(role + " dataset has " + std::to_string(have) + " frames, fewer than the sequence length " +
                       std::to_string(n));
    }
}

std::optional<GroundTruth> load_truth(const RunConfig& cfg) {
    if (cfg.ground_truth.empty()) {
        return std::nullopt;
    }
    GroundTruth gt = load_ground_truth(cfg.ground_truth);
    gt.reference_spacing = cfg.reference_spacing;
    gt.query_spacing = cfg.query_spacing;
    return gt;
}

// Reference side of a run: a saved store file or a frame directory.
struct Reference {
    TemplateStore store;
    std::vector<GrayImage> small;
};

Reference load_reference(const RunConfig& cfg) {
    Reference ref;
    if (fs::is_regular_file(cfg.reference_dir)) {
        ref.store = load_store(cfg.reference_dir);
        if (ref.store.rx() != cfg.rx || ref.store.ry() != cfg.ry || ref.store.patch_side() != cfg.patch_side) {
            throw ConfigError("template store geometry does not match rx/ry/patch-side");
        }
        return ref;
    }
    const auto frames = load_dataset(cfg.reference_dir, "reference");
    ref.small = preprocess(frames, cfg.reference_crop, cfg.rx, cfg.ry);
    ref.store = build_store(ref.small, cfg.patch_side);
    return ref;
}

} // namespace

std::vector<GrayImage> preprocess(std::span<const GrayImage> frames, const std::optional<CropRect>& crop_rect, int rx,
                                  int ry) {
    std::vector<GrayImage> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        out.push_back(downsample(crop_rect ? crop(f, *crop_rect) : f, rx, ry));
    }
    return out;
}

TemplateStore build_store(std::span<const GrayImage> small_frames, int patch_side) {
    if (small_frames.empty()) {
        throw InvalidInput("cannot build a template store from zero frames");
    }
    TemplateStore store(small_frames.front().width, small_frames.front().height, patch_side);
    for (std::size_t i = 0; i < small_frames.size(); ++i) {
        Template t = patch_normalize(small_frames[i], patch_side);
        t.source_index = i;
        store.learn(t);
    }
    return store;
}

MatchRun match_against_store(const TemplateStore& reference, std::span<const GrayImage> query_small,
                             const MatchParams& params) {
    MatchRun run;
    run.total_query_frames = query_small.size();
    run.warm_up_frames = std::min(query_small.size(), params.sequence_length - 1);
    DifferenceMatrix matrix(params.sequence_length);
    for (std::size_t i = 0; i < query_small.size(); ++i) {
        Template query = patch_normalize(query_small[i], params.patch_side);
        query.source_index = i;
        matrix.push_column(neighborhood_normalize(difference_vector(reference, query, params.threads),
                                                  params.half_window));
        if (matrix.full()) {
            run.matches.push_back(best_match(matrix, params.slope, params.threshold, params.threads));
        }
    }
    return run;
}

MatchRun match_online(std::span<const GrayImage> small_frames, const MatchParams& params) {
    MatchRun run;
    run.total_query_frames = small_frames.size();
    run.warm_up_frames = std::min(small_frames.size(), params.sequence_length - 1);
    if (small_frames.empty()) {
        return run;
    }
    TemplateStore store(small_frames.front().width, small_frames.front().height, params.patch_side);
    DifferenceMatrix matrix(params.sequence_length);
    for (std::size_t i = 0; i < small_frames.size(); ++i) {
        Template t = patch_normalize(small_frames[i], params.patch_side);
        t.source_index = i;
        matrix.push_column(neighborhood_normalize(difference_vector(store, t, params.threads), params.half_window));
        store.learn(t);
        if (matrix.full()) {
            run.matches.push_back(best_match(matrix, params.slope, params.threshold, params.threads));
        }
    }
    return run;
}

MatchOutcome finish_match(MatchRun run, const GroundTruth* gt, std::optional<double> threshold, double fp_tolerance) {
    MatchOutcome outcome;
    if (gt) {
        outcome.sweep = sweep_threshold(run, *gt, fp_tolerance);
    }
    if (threshold) {
        outcome.threshold = *threshold;
    } else if (outcome.sweep) {
        outcome.threshold = outcome.sweep->best_threshold;
    }
    outcome.run = apply_threshold(run, outcome.threshold);
    if (gt) {
        outcome.report = score_matches(outcome.run, *gt, fp_tolerance);
    }
    return outcome;
}

namespace {

/// Mean of (newest source frame - source frame at the matched place) over the
/// correct matches of a strided blurred run. NaN without correct matches.
double mean_source_lag(const MatchRun& run, const GroundTruth& strided_gt, const GroundTruth& source_gt,
                       int first_frame, std::size_t stride, double fp_tolerance) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& m : run.matches) {
        const auto q = static_cast<double>(m.query_center_index);
        if (!m.accepted || !strided_gt.covers(q)) {
            continue;
        }
        const auto ref = static_cast<double>(m.reference_center_index);
        if (std::abs(interpolate_truth(strided_gt, q) - ref) > fp_tolerance ||
            ref < source_gt.anchors.front().reference_frame || ref > source_gt.anchors.back().reference_frame) {
            continue;
        }
        const double newest = first_frame + q * static_cast<double>(stride);
        sum += newest - query_frame_at(source_gt, ref);
        ++count;
    }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::vector<BlurSweepRow> blur_sweep(const BlurSweepInput& input, std::span<const double> exposures,
                                     const MatchParams& params) {
    if (input.output_stride == 0) {
        throw InvalidInput("blur output stride must be positive");
    }
    if (!input.reference || !input.ground_truth) {
        throw InvalidInput("blur sweep needs a reference store and ground truth");
    }
    std::vector<BlurSweepRow> rows;
    for (double exposure : exposures) {
        const BlurSpec spec{exposure, input.source_fps};
        BlurSweepRow row;
        row.exposure_ms = exposure;
        row.window = spec.window();
        row.expected_lag = expected_lag(spec);

        const auto kept = temporal_blur(input.query_frames, row.window, input.output_stride);
        const auto small = preprocess(kept, input.query_crop, input.reference->rx(), input.reference->ry());
        const GroundTruth gt = reindex_query_frames(*input.ground_truth, row.window - 1,
                                                    static_cast<double>(input.output_stride));
        const MatchOutcome outcome =
            finish_match(match_against_store(*input.reference, small, params), &gt, input.threshold,
                         input.fp_tolerance);
        row.threshold = outcome.threshold;
        row.report = *outcome.report;
        row.measured_lag = mean_source_lag(outcome.run, gt, *input.ground_truth, row.window - 1,
                                           input.output_stride, input.fp_tolerance);
        rows.push_back(row);
    }
    return rows;
}

std::vector<RankingDistribution> rank_all_variants(std::span<const GrayImage> reference_small,
                                                   std::span<const GrayImage> query_small, const GroundTruth& gt,
                                                   const RankingOptions& options) {
    std::vector<RankingDistribution> out;
    for (RankVariant v : all_rank_variants()) {
        out.push_back(ranking_analysis(reference_small, query_small, gt, v, options));
    }
    return out;
}

void run_preprocess(const RunConfig& cfg, const fs::path& out) {
    cfg.validate();
    fs::create_directories(out);
    const std::string& dir = cfg.reference_dir.empty() ? cfg.query_dir : cfg.reference_dir;
    const auto& rect = cfg.reference_dir.empty() ? cfg.query_crop : cfg.reference_crop;
    const auto frames = load_dataset(dir, "input");
    const auto small = preprocess(frames, rect, cfg.rx, cfg.ry);
    save_store(out / "templates.sqsm", build_store(small, cfg.patch_side));
    write_manifest(out, "preprocess", cfg, {"templates: " + std::to_string(small.size())});
}

MatchOutcome run_match(const RunConfig& cfg, const fs::path& out) {
    cfg.validate();
    const auto gt = load_truth(cfg);
    const auto query_frames = load_dataset(cfg.query_dir, "query");
    const auto query_small = preprocess(query_frames, cfg.query_crop, cfg.rx, cfg.ry);
    require_frames(query_small.size(), cfg.sequence_length, "query");

    MatchRun run;
    double v_av = 1.0;
    if (cfg.online) {
        v_av = cfg.v_av.value_or(1.0);
        run = match_online(query_small, params_from(cfg, v_av));
    } else {
        const Reference ref = load_reference(cfg);
        require_frames(ref.store.size(), cfg.sequence_length, "reference");
        v_av = cfg.resolve_v_av(ref.store.size(), query_small.size());
        run = match_against_store(ref.store, query_small, params_from(cfg, v_av));
    }

    MatchOutcome outcome = finish_match(std::move(run), gt ? &*gt : nullptr, cfg.threshold, cfg.fp_tolerance);
    outcome.v_av = v_av;

    fs::create_directories(out);
    RunConfig resolved = cfg;
    resolved.v_av = v_av;
    write_manifest(out, "match", resolved, {"applied threshold: " + format_real(outcome.threshold)});
    {
        auto f = open_output(out / "matches.csv");
        write_matches_csv(f, outcome.run);
    }
    if (gt) {
        auto report = open_output(out / "report.csv");
        write_report_csv(report, *outcome.report, outcome.threshold);
        auto sweep = open_output(out / "sweep.csv");
        write_sweep_csv(sweep, *outcome.sweep);
        auto mvt = open_output(out / "matches_vs_truth.csv");
        write_matches_vs_truth_csv(mvt, outcome.run, *gt);
    }
    return outcome;
}

std::vector<BlurSweepRow> run_blur_sweep(const RunConfig& cfg, const fs::path& out, bool write_frames) {
    cfg.validate();
    if (cfg.exposures.empty()) {
        throw ConfigError("blur sweep needs at least one exposure");
    }
    const auto gt = load_truth(cfg);
    if (!gt) {
        throw ConfigError("blur sweep needs ground truth");
    }
    const auto query_paths = list_frames(cfg.query_dir);
    const auto query_frames = load_dataset(cfg.query_dir, "query");
    const Reference ref = load_reference(cfg);
    require_frames(ref.store.size(), cfg.sequence_length, "reference");
    // v_av describes the unblurred query; the strided query advances faster.
    const double v_av = cfg.resolve_v_av(ref.store.size(), query_frames.size());
    const auto stride = static_cast<std::size_t>(cfg.blur_stride);

    BlurSweepInput input;
    input.reference = &ref.store;
    input.query_frames = query_frames;
    input.query_crop = cfg.query_crop;
    input.ground_truth = &*gt;
    input.source_fps = cfg.source_fps;
    input.output_stride = stride;
    input.threshold = cfg.threshold;
    input.fp_tolerance = cfg.fp_tolerance;

    // Validate every exposure before doing any work.
    for (double e : cfg.exposures) {
        const int window = BlurSpec{e, cfg.source_fps}.window();
        if (static_cast<std::size_t>(window) > query_frames.size()) {
            throw ConfigError("exposure " + format_real(e) + " ms needs " + std::to_string(window) +
                              " frames but the query has " + std::to_string(query_frames.size()));
        }
        require_frames((query_frames.size() - window) / stride + 1, cfg.sequence_length, "blurred query");
    }

    const auto rows = blur_sweep(input, cfg.exposures, params_from(cfg, v_av * static_cast<double>(stride)));

    fs::create_directories(out);
    RunConfig resolved = cfg;
    resolved.v_av = v_av;
    write_manifest(out, "blur-sweep", resolved);
    {
        auto f = open_output(out / "blur_sweep.csv");
        write_blur_sweep_csv(f, rows);
    }
    if (write_frames) {
        for (const auto& row : rows) {
            const fs::path dir = out / ("blurred_" + format_real(row.exposure_ms) + "ms");
            fs::create_directories(dir);
            const auto blurred = temporal_blur(query_frames, row.window, stride);
            for (std::size_t k = 0; k < blurred.size(); ++k) {
                // Named after the newest contributing input frame.
                const fs::path& source = query_paths[k * stride + row.window - 1];
                fs::path name = source.filename();
                if (name.extension() == ".ppm" || name.extension() == ".PPM") {
                    name.replace_extension(".pgm");
                }
                write_image(dir / name, blurred[k]);
            }
        }
    }
    return rows;
}

std::vector<RankingDistribution> run_rank_analysis(const RunConfig& cfg, const fs::path& out) {
    cfg.validate();
    const auto gt = load_truth(cfg);
    if (!gt) {
        throw ConfigError("rank analysis needs ground truth");
    }
    const auto ref_small = preprocess(load_dataset(cfg.reference_dir, "reference"), cfg.reference_crop, cfg.rx, cfg.ry);
    const auto query_small = preprocess(load_dataset(cfg.query_dir, "query"), cfg.query_crop, cfg.rx, cfg.ry);

    RankingOptions options;
    options.patch_side = cfg.patch_side;
    options.half_window = cfg.half_window;
    options.histogram_bins = cfg.histogram_bins;
    options.threads = cfg.threads;
    const auto dists = rank_all_variants(ref_small, query_small, *gt, options);

    fs::create_directories(out);
    write_manifest(out, "rank-analysis", cfg);
    for (const auto& d : dists) {
        const fs::path dir = out / to_string(d.variant);
        fs::create_directories(dir);
        auto hist = open_output(dir / "rank_histogram.csv");
        write_rank_histogram_csv(hist, d);
        auto cum = open_output(dir / "rank_cumulative.csv");
        write_rank_cumulative_csv(cum, d);
    }
    auto summary = open_output(out / "rank_summary.csv");
    write_rank_summary_csv(summary, dists);
    return dists;
}

EvalReport run_eval(const RunConfig& cfg, const fs::path& matches_csv, const fs::path& out) {
    cfg.validate();
    const auto gt = load_truth(cfg);
    if (!gt) {
        throw ConfigError("eval needs ground truth");
    }
    std::ifstream in(matches_csv);
    if (!in) {
        throw IoError("cannot open " + matches_csv.string());
    }
    MatchRun run = read_matches_csv(in);
    // Without an explicit threshold the file's own accept flags stand.
    MatchOutcome outcome;
    outcome.run = cfg.threshold ? apply_threshold(run, *cfg.threshold) : run;
    outcome.report = score_matches(outcome.run, *gt, cfg.fp_tolerance);
    outcome.sweep = sweep_threshold(run, *gt, cfg.fp_tolerance);

    fs::create_directories(out);
    write_manifest(out, "eval", cfg, {"matches: " + matches_csv.string()});
    auto report = open_output(out / "report.csv");
    write_report_csv(report, *outcome.report, cfg.threshold);
    auto sweep = open_output(out / "sweep.csv");
    write_sweep_csv(sweep, *outcome.sweep);
    auto mvt = open_output(out / "matches_vs_truth.csv");
    write_matches_vs_truth_csv(mvt, outcome.run, *gt);
    return *outcome.report;
}

void write_blur_sweep_csv(std::ostream& out, std::span<const BlurSweepRow> rows) {
    out << "exposure_ms,window,expected_lag_frames,measured_lag_frames,threshold,recall,mean_error_frames,"
           "max_error_frames,mean_error_meters,max_error_meters,false_positive_count\n";
    for (const auto& r : rows) {
        out << format_real(r.exposure_ms) << ',' << r.window << ',' << format_real(r.expected_lag) << ','
            << format_real(r.measured_lag) << ',' << format_real(r.threshold) << ',' << format_real(r.report.recall)
            << ',' << format_real(r.report.mean_error_frames) << ',' << format_real(r.report.max_error_frames) << ','
            << format_real(r.report.mean_error_meters) << ',' << format_real(r.report.max_error_meters) << ','
            << r.report.false_positive_count << '\n';
    }
}

void write_rank_summary_csv(std::ostream& out, std::span<const RankingDistribution> dists) {
    out << "variant,queries,skipped,top1_rate,mean_percentile,top10_fraction,top20_fraction,top50_fraction\n";
    for (const auto& d : dists) {
        const auto cum = [&](std::size_t x) { return d.cumulative.empty() ? 0.0 : d.cumulative[x]; };
        out << to_string(d.variant) << ',' << d.ranks.size() << ',' << d.skipped << ',' << format_real(d.top1_rate())
            << ',' << format_real(d.mean_percentile()) << ',' << format_real(cum(10)) << ',' << format_real(cum(20))
            << ',' << format_real(cum(50)) << '\n';
    }
}

} // namespace seqslam
