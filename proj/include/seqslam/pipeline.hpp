#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "seqslam/config.hpp"
#include "seqslam/eval.hpp"
#include "seqslam/image.hpp"
#include "seqslam/matching.hpp"
#include "seqslam/sequence.hpp"

namespace seqslam {

struct MatchParams {
    int patch_side = 8;
    std::size_t sequence_length = 50;
    int half_window = 10;
    SlopeConfig slope;
    /// s_m. The default accepts every valid trajectory.
    double threshold = std::numeric_limits<double>::infinity();
    unsigned threads = 1;
};

/// Optional crop followed by area downsampling to rx x ry.
std::vector<GrayImage> preprocess(std::span<const GrayImage> frames, const std::optional<CropRect>& crop, int rx,
                                  int ry);

/// Patch-normalizes every frame and learns it, in order.
TemplateStore build_store(std::span<const GrayImage> small_frames, int patch_side);

/// Matches each query frame against the complete reference store: difference
/// vector, neighborhood normalization, matrix push, then a sequence search once
/// the matrix is full. The first sequence_length - 1 frames are warm-up.
MatchRun match_against_store(const TemplateStore& reference, std::span<const GrayImage> query_small,
                             const MatchParams& params);

/// Single-stream mode: each frame is compared with every earlier frame and
/// then learned.
MatchRun match_online(std::span<const GrayImage> small_frames, const MatchParams& params);

struct MatchOutcome {
    MatchRun run;
    double v_av = 1.0;
    double threshold = std::numeric_limits<double>::infinity();
    std::optional<SweepResult> sweep;
    std::optional<EvalReport> report;
};

/// Applies the threshold policy to a finished run: an explicit threshold wins,
/// otherwise the zero-false-positive threshold of the sweep when ground truth
/// exists, otherwise everything is accepted.
MatchOutcome finish_match(MatchRun run, const GroundTruth* gt, std::optional<double> threshold,
                          double fp_tolerance);

struct BlurSweepRow {
    double exposure_ms = 0.0;
    int window = 1;
    double expected_lag = 0.0;
    /// Mean over correct matches of the newest contributing source frame minus
    /// the source frame whose true position is the matched reference frame.
    double measured_lag = 0.0;
    double threshold = 0.0;
    EvalReport report;
};

struct BlurSweepInput {
    const TemplateStore* reference = nullptr;
    /// Full resolution gray query frames at source_fps.
    std::span<const GrayImage> query_frames;
    std::optional<CropRect> query_crop;
    const GroundTruth* ground_truth = nullptr;
    double source_fps = 15.0;
    /// Keep every stride-th blurred frame (a capture rate below source_fps).
    std::size_t output_stride = 1;
    std::optional<double> threshold;
    double fp_tolerance = 10.0;
};

/// Blurs the query for each exposure, keeps every output_stride-th frame,
/// matches it against the reference and scores it against ground truth
/// realigned to each output's newest input frame. params.slope.v_av refers to
/// the strided query.
std::vector<BlurSweepRow> blur_sweep(const BlurSweepInput& input, std::span<const double> exposures,
                                     const MatchParams& params);

std::vector<RankingDistribution> rank_all_variants(std::span<const GrayImage> reference_small,
                                                   std::span<const GrayImage> query_small, const GroundTruth& gt,
                                                   const RankingOptions& options);

// Directory-level commands. Each writes manifest.cfg plus its CSVs into `out`.
void run_preprocess(const RunConfig& cfg, const std::filesystem::path& out);
MatchOutcome run_match(const RunConfig& cfg, const std::filesystem::path& out);
std::vector<BlurSweepRow> run_blur_sweep(const RunConfig& cfg, const std::filesystem::path& out,
                                         bool write_frames = false);
std::vector<RankingDistribution> run_rank_analysis(const RunConfig& cfg, const std::filesystem::path& out);
EvalReport run_eval(const RunConfig& cfg, const std::filesystem::path& matches_csv, const std::filesystem::path& out);

void write_blur_sweep_csv(std::ostream& out, std::span<const BlurSweepRow> rows);
void write_rank_summary_csv(std::ostream& out, std::span<const RankingDistribution> dists);

} // namespace seqslam
