#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqslam/image.hpp"
#include "seqslam/sequence.hpp"

namespace seqslam {

/// Sparse query -> reference frame correspondences, linearly interpolated in
/// between. Spacings are the mean distance between frames of each dataset.
struct GroundTruth {
    struct Anchor {
        double query_frame = 0.0;
        double reference_frame = 0.0;
        bool operator==(const Anchor&) const = default;
    };
    std::vector<Anchor> anchors;
    std::optional<double> query_spacing;
    std::optional<double> reference_spacing;

    /// At least two anchors, strictly increasing in both coordinates.
    void validate() const;
    double first_query() const { return anchors.front().query_frame; }
    double last_query() const { return anchors.back().query_frame; }
    bool covers(double query_frame) const;
};

/// Reads `query_frame,reference_frame` anchor rows (header required).
GroundTruth read_ground_truth(std::istream& in);
GroundTruth load_ground_truth(const std::filesystem::path& path);
void write_ground_truth(std::ostream& out, const GroundTruth& gt);

/// Reference position (fractional frame) for a query frame. Throws OutOfRange
/// outside the anchor span.
double interpolate_truth(const GroundTruth& gt, double query_frame);

/// Inverse of interpolate_truth: the fractional query frame whose true
/// position is `reference_frame`. Throws OutOfRange outside the anchor span.
double query_frame_at(const GroundTruth& gt, double reference_frame);

/// Ground truth re-indexed so that new query frame j is old frame
/// offset + stride * j.
GroundTruth reindex_query_frames(const GroundTruth& gt, double offset, double stride = 1.0);

/// Output of a matching run: one SequenceMatch per evaluated frame plus the
/// bookkeeping recall needs.
struct MatchRun {
    std::vector<SequenceMatch> matches;
    std::size_t total_query_frames = 0;
    std::size_t warm_up_frames = 0;
};

/// Copy of `run` with acceptance recomputed as score < threshold.
MatchRun apply_threshold(const MatchRun& run, double threshold);

struct EvalReport {
    double recall = 0.0;
    double mean_error_frames = 0.0;
    double max_error_frames = 0.0;
    double mean_error_meters = 0.0;
    double max_error_meters = 0.0;
    std::size_t warm_up_frames = 0;
    std::size_t false_positive_count = 0;
    std::size_t total_frames = 0;
    std::size_t accepted_count = 0;
    std::size_t correct_count = 0;
    /// Mean of (truth - reported) over correct matches, in reference frames.
    double mean_signed_offset_frames = 0.0;

    bool operator==(const EvalReport&) const = default;
};

/// Accepted matches within `fp_tolerance` frames of the interpolated truth are
/// correct; the rest are false positives and do not enter the error
/// statistics. Recall is correct / total query frames, warm-up included.
/// Matches whose query frame lies outside the ground truth are not counted.
EvalReport score_matches(const MatchRun& run, const GroundTruth& gt, double fp_tolerance);

struct SweepPoint {
    double threshold = 0.0;
    EvalReport report;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    /// Highest-recall threshold without false positives (lowest such
    /// threshold on ties).
    double best_threshold = 0.0;
    EvalReport best_report;
};

/// Scores the run at each threshold in `thresholds`.
SweepResult sweep_threshold(const MatchRun& run, const GroundTruth& gt, double fp_tolerance,
                            std::span<const double> thresholds);
/// Candidate thresholds are -inf, midpoints between consecutive distinct
/// match scores, and +inf, which realizes every distinct acceptance set.
SweepResult sweep_threshold(const MatchRun& run, const GroundTruth& gt, double fp_tolerance);

enum class RankVariant { raw, patch_only, neighborhood_only, both };

std::string to_string(RankVariant v);
std::span<const RankVariant> all_rank_variants();

struct RankingOptions {
    int patch_side = 8;
    int half_window = 10;
    int histogram_bins = 100;
    unsigned threads = 1;
};

struct RankingDistribution {
    RankVariant variant = RankVariant::raw;
    /// 1-based rank of the correct reference per evaluated query.
    std::vector<std::size_t> ranks;
    /// (rank - 1) / (references - 1), in [0, 1].
    std::vector<double> percentiles;
    std::vector<std::size_t> histogram;
    /// cumulative[x] = fraction of queries with percentile <= x / 100, x = 0..100.
    std::vector<double> cumulative;
    std::size_t skipped = 0;

    double mean_percentile() const;
    double top1_rate() const;
};

/// Ranks single-image differences between every query frame and all
/// references. Inputs are the resolution-reduced gray images; the variant
/// selects patch and/or neighborhood normalization.
RankingDistribution ranking_analysis(std::span<const GrayImage> references, std::span<const GrayImage> queries,
                                     const GroundTruth& gt, RankVariant variant, const RankingOptions& options);

// CSV emitters.
void write_report_csv(std::ostream& out, const EvalReport& report, std::optional<double> threshold);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_matches_vs_truth_csv(std::ostream& out, const MatchRun& run, const GroundTruth& gt);
void write_rank_histogram_csv(std::ostream& out, const RankingDistribution& dist);
void write_rank_cumulative_csv(std::ostream& out, const RankingDistribution& dist);

/// Match CSV: header `query_index,reference_index,slope,score,accepted`.
/// Warm-up frames are rows with only query_index filled in.
void write_matches_csv(std::ostream& out, const MatchRun& run);
MatchRun read_matches_csv(std::istream& in);

} // namespace seqslam
