#include "seqslam/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "seqslam/csv.hpp"
#include "seqslam/error.hpp"
#include "seqslam/imaging.hpp"
#include "seqslam/matching.hpp"

namespace seqslam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

void GroundTruth::validate() const {
    if (anchors.size() < 2) {
        throw InvalidInput("ground truth needs at least two anchors");
    }
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        if (!(anchors[i].query_frame > anchors[i - 1].query_frame) ||
            !(anchors[i].reference_frame > anchors[i - 1].reference_frame)) {
            throw InvalidInput("ground truth anchors must increase strictly in both coordinates (row " +
                               std::to_string(i) + ")");
        }
    }
}

bool GroundTruth::covers(double query_frame) const {
    return !anchors.empty() && query_frame >= first_query() && query_frame <= last_query();
}

GroundTruth read_ground_truth(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("ground truth file is empty");
    }
    const auto header = split_csv(line);
    if (header.size() != 2 || header[0] != "query_frame" || header[1] != "reference_frame") {
        throw IoError("ground truth header must be 'query_frame,reference_frame'");
    }
    GroundTruth gt;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 2) {
            throw IoError("ground truth line " + std::to_string(line_no) + ": expected two fields");
        }
        try {
            gt.anchors.push_back({parse_real(fields[0]), parse_real(fields[1])});
        } catch (const InvalidInput& e) {
            throw IoError("ground truth line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    gt.validate();
    return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open ground truth " + path.string());
    }
    return read_ground_truth(in);
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
    out << "query_frame,reference_frame\n";
    char buf[64];
    for (const auto& a : gt.anchors) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a.query_frame, a.reference_frame);
        out << buf;
    }
}

double interpolate_truth(const GroundTruth& gt, double query_frame) {
    if (!gt.covers(query_frame)) {
        throw OutOfRange("query frame " + format_real(query_frame) + " lies outside the ground truth anchors");
    }
    const auto& a = gt.anchors;
    auto upper = std::lower_bound(a.begin(), a.end(), query_frame,
                                  [](const GroundTruth::Anchor& anchor, double q) { return anchor.query_frame < q; });
    if (upper->query_frame == query_frame) {
        return upper->reference_frame;
    }
    const auto lower = std::prev(upper);
    // Multiply before dividing so integral anchors interpolate exactly.
    return lower->reference_frame + (query_frame - lower->query_frame) *
                                        (upper->reference_frame - lower->reference_frame) /
                                        (upper->query_frame - lower->query_frame);
}

double query_frame_at(const GroundTruth& gt, double reference_frame) {
    const auto& a = gt.anchors;
    if (a.empty() || reference_frame < a.front().reference_frame || reference_frame > a.back().reference_frame) {
        throw OutOfRange("reference frame " + format_real(reference_frame) +
                         " lies outside the ground truth anchors");
    }
    auto upper = std::lower_bound(a.begin(), a.end(), reference_frame, [](const GroundTruth::Anchor& anchor, double r) {
        return anchor.reference_frame < r;
    });
    if (upper->reference_frame == reference_frame) {
        return upper->query_frame;
    }
    const auto lower = std::prev(upper);
    return lower->query_frame + (reference_frame - lower->reference_frame) *
                                    (upper->query_frame - lower->query_frame) /
                                    (upper->reference_frame - lower->reference_frame);
}

GroundTruth reindex_query_frames(const GroundTruth& gt, double offset, double stride) {
    if (!(stride > 0.0)) {
        throw InvalidInput("query stride must be positive");
    }
    GroundTruth out;
    out.query_spacing = gt.query_spacing;
    out.reference_spacing = gt.reference_spacing;
    if (gt.query_spacing) {
        out.query_spacing = *gt.query_spacing * stride;
    }
    // Keep the boundary at the new frame 0 exact when it falls between anchors.
    if (gt.covers(offset) && gt.first_query() < offset) {
        out.anchors.push_back({0.0, interpolate_truth(gt, offset)});
    }
    for (const auto& a : gt.anchors) {
        if (a.query_frame >= offset) {
            out.anchors.push_back({(a.query_frame - offset) / stride, a.reference_frame});
        }
    }
    return out;
}

MatchRun apply_threshold(const MatchRun& run, double threshold) {
    MatchRun out = run;
    for (auto& m : out.matches) {
        m.accepted = m.reference_center_index >= 0 && m.score < threshold;
    }
    return out;
}

EvalReport score_matches(const MatchRun& run, const GroundTruth& gt, double fp_tolerance) {
    EvalReport report;
    report.total_frames = run.total_query_frames;
    report.warm_up_frames = run.warm_up_frames;

    double error_sum = 0.0;
    double offset_sum = 0.0;
    for (const auto& m : run.matches) {
        if (!m.accepted) {
            continue;
        }
        const auto query = static_cast<double>(m.query_center_index);
        if (!gt.covers(query)) {
            continue;
        }
        ++report.accepted_count;
        const double offset = interpolate_truth(gt, query) - static_cast<double>(m.reference_center_index);
        const double error = std::abs(offset);
        if (error > fp_tolerance) {
            ++report.false_positive_count;
            continue;
        }
        ++report.correct_count;
        error_sum += error;
        offset_sum += offset;
        report.max_error_frames = std::max(report.max_error_frames, error);
    }
    if (report.correct_count > 0) {
        report.mean_error_frames = error_sum / static_cast<double>(report.correct_count);
        report.mean_signed_offset_frames = offset_sum / static_cast<double>(report.correct_count);
    }
    if (report.total_frames > 0) {
        report.recall = static_cast<double>(report.correct_count) / static_cast<double>(report.total_frames);
    }
    const double spacing = gt.reference_spacing.value_or(std::numeric_limits<double>::quiet_NaN());
    report.mean_error_meters = report.mean_error_frames * spacing;
    report.max_error_meters = report.max_error_frames * spacing;
    return report;
}

SweepResult sweep_threshold(const MatchRun& run, const GroundTruth& gt, double fp_tolerance,
                            std::span<const double> thresholds) {
    SweepResult result;
    bool have_best = false;
    for (double threshold : thresholds) {
        const EvalReport report = score_matches(apply_threshold(run, threshold), gt, fp_tolerance);
        result.points.push_back({threshold, report});
        if (report.false_positive_count != 0) {
            continue;
        }
        if (!have_best || report.recall > result.best_report.recall ||
            (report.recall == result.best_report.recall && threshold < result.best_threshold)) {
            result.best_threshold = threshold;
            result.best_report = report;
            have_best = true;
        }
    }
    if (!have_best) {
        // Nothing accepted means nothing wrong.
        result.best_threshold = -kInf;
        result.best_report = score_matches(apply_threshold(run, -kInf), gt, fp_tolerance);
    }
    return result;
}

SweepResult sweep_threshold(const MatchRun& run, const GroundTruth& gt, double fp_tolerance) {
    std::vector<double> scores;
    for (const auto& m : run.matches) {
        if (m.reference_center_index >= 0 && std::isfinite(m.score)) {
            scores.push_back(m.score);
        }
    }
    std::sort(scores.begin(), scores.end());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

    std::vector<double> thresholds{-kInf};
    for (std::size_t i = 1; i < scores.size(); ++i) {
        thresholds.push_back(scores[i - 1] + (scores[i] - scores[i - 1]) / 2.0);
    }
    thresholds.push_back(kInf);
    return sweep_threshold(run, gt, fp_tolerance, thresholds);
}

std::string to_string(RankVariant v) {
    switch (v) {
    case RankVariant::raw:
        return "raw";
    case RankVariant::patch_only:
        return "patch_only";
    case RankVariant::neighborhood_only:
        return "neighborhood_only";
    case RankVariant::both:
        return "both";
    }
    return "unknown";
}

std::span<const RankVariant> all_rank_variants() {
    static constexpr std::array<RankVariant, 4> variants{RankVariant::raw, RankVariant::patch_only,
                                                         RankVariant::neighborhood_only, RankVariant::both};
    return variants;
}

double RankingDistribution::mean_percentile() const {
    if (percentiles.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(percentiles.begin(), percentiles.end(), 0.0) / static_cast<double>(percentiles.size());
}

double RankingDistribution::top1_rate() const {
    if (ranks.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto top = std::count(ranks.begin(), ranks.end(), std::size_t{1});
    return static_cast<double>(top) / static_cast<double>(ranks.size());
}

RankingDistribution ranking_analysis(std::span<const GrayImage> references, std::span<const GrayImage> queries,
                                     const GroundTruth& gt, RankVariant variant, const RankingOptions& options) {
    if (references.size() < 2) {
        throw InvalidInput("ranking needs at least two reference frames");
    }
    if (options.histogram_bins < 1) {
        throw InvalidInput("histogram needs at least one bin");
    }
    const bool patch = variant == RankVariant::patch_only || variant == RankVariant::both;
    const bool neighborhood = variant == RankVariant::neighborhood_only || variant == RankVariant::both;

    auto represent = [&](const GrayImage& img, std::size_t index) {
        Template t = patch ? patch_normalize(img, options.patch_side) : raw_template(img);
        t.source_index = index;
        return t;
    };
    std::vector<Template> refs;
    refs.reserve(references.size());
    for (std::size_t k = 0; k < references.size(); ++k) {
        refs.push_back(represent(references[k], k));
    }

    RankingDistribution dist;
    dist.variant = variant;
    const auto last_ref = static_cast<double>(references.size() - 1);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto qf = static_cast<double>(q);
        if (!gt.covers(qf)) {
            ++dist.skipped;
            continue;
        }
        const double correct_pos = std::floor(interpolate_truth(gt, qf) + 0.5);
        if (correct_pos < 0.0 || correct_pos > last_ref) {
            ++dist.skipped;
            continue;
        }
        DifferenceVector vec = difference_vector(refs, represent(queries[q], q), options.threads);
        if (neighborhood) {
            vec = neighborhood_normalize(vec, options.half_window);
        }
        const double correct_score = vec.scores[static_cast<std::size_t>(correct_pos)];
        // Ties count in the correct match's favour.
        const auto better = std::count_if(vec.scores.begin(), vec.scores.end(),
                                          [&](double s) { return s < correct_score; });
        const auto rank = static_cast<std::size_t>(better) + 1;
        dist.ranks.push_back(rank);
        dist.percentiles.push_back(static_cast<double>(rank - 1) / last_ref);
    }

    dist.histogram.assign(static_cast<std::size_t>(options.histogram_bins), 0);
    for (double p : dist.percentiles) {
        const auto bin = std::min<std::size_t>(static_cast<std::size_t>(p * options.histogram_bins),
                                               dist.histogram.size() - 1);
        ++dist.histogram[bin];
    }
    dist.cumulative.assign(101, 0.0);
    if (!dist.percentiles.empty()) {
        std::vector<double> sorted = dist.percentiles;
        std::sort(sorted.begin(), sorted.end());
        for (int x = 0; x <= 100; ++x) {
            // Slack keeps x / 100.0 rounding from excluding an exact percentile.
            const auto within = std::upper_bound(sorted.begin(), sorted.end(), x / 100.0 + 1e-12) - sorted.begin();
            dist.cumulative[static_cast<std::size_t>(x)] =
                static_cast<double>(within) / static_cast<double>(sorted.size());
        }
    }
    return dist;
}

void write_report_csv(std::ostream& out, const EvalReport& report, std::optional<double> threshold) {
    out << "metric,value\n";
    if (threshold) {
        out << "threshold," << format_real(*threshold) << '\n';
    }
    out << "recall," << format_real(report.recall) << '\n'
        << "mean_error_frames," << format_real(report.mean_error_frames) << '\n'
        << "max_error_frames," << format_real(report.max_error_frames) << '\n'
        << "mean_error_meters," << format_real(report.mean_error_meters) << '\n'
        << "max_error_meters," << format_real(report.max_error_meters) << '\n'
        << "warm_up_frames," << report.warm_up_frames << '\n'
        << "false_positive_count," << report.false_positive_count << '\n'
        << "total_frames," << report.total_frames << '\n'
        << "accepted_count," << report.accepted_count << '\n'
        << "correct_count," << report.correct_count << '\n'
        << "mean_signed_offset_frames," << format_real(report.mean_signed_offset_frames) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "threshold,recall,mean_error_frames,max_error_frames,false_positive_count,accepted_count,zero_fp_best\n";
    for (const auto& p : sweep.points) {
        out << format_real(p.threshold) << ',' << format_real(p.report.recall) << ','
            << format_real(p.report.mean_error_frames) << ',' << format_real(p.report.max_error_frames) << ','
            << p.report.false_positive_count << ',' << p.report.accepted_count << ','
            << (p.threshold == sweep.best_threshold ? 1 : 0) << '\n';
    }
}

void write_matches_vs_truth_csv(std::ostream& out, const MatchRun& run, const GroundTruth& gt) {
    out << "query,reported,truth\n";
    for (const auto& m : run.matches) {
        if (!m.accepted) {
            continue;
        }
        const auto q = static_cast<double>(m.query_center_index);
        const double truth = gt.covers(q) ? interpolate_truth(gt, q) : std::numeric_limits<double>::quiet_NaN();
        out << m.query_center_index << ',' << m.reference_center_index << ',' << format_real(truth) << '\n';
    }
}

void write_rank_histogram_csv(std::ostream& out, const RankingDistribution& dist) {
    out << "bin_low,bin_high,count\n";
    const auto bins = static_cast<double>(dist.histogram.size());
    for (std::size_t i = 0; i < dist.histogram.size(); ++i) {
        out << format_real(static_cast<double>(i) / bins) << ',' << format_real(static_cast<double>(i + 1) / bins)
            << ',' << dist.histogram[i] << '\n';
    }
}

void write_rank_cumulative_csv(std::ostream& out, const RankingDistribution& dist) {
    out << "top_percent,fraction\n";
    for (std::size_t x = 0; x < dist.cumulative.size(); ++x) {
        out << x << ',' << format_real(dist.cumulative[x]) << '\n';
    }
}

void write_matches_csv(std::ostream& out, const MatchRun& run) {
    out << "query_index,reference_index,slope,score,accepted\n";
    for (std::size_t i = 0; i < run.warm_up_frames; ++i) {
        out << i << ",,,,0\n";
    }
    for (const auto& m : run.matches) {
        out << m.query_center_index << ',' << m.reference_center_index << ',' << format_real(m.slope) << ','
            << format_real(m.score) << ',' << (m.accepted ? 1 : 0) << '\n';
    }
}

MatchRun read_matches_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "query_index,reference_index,slope,score,accepted") {
        throw IoError("match file header must be 'query_index,reference_index,slope,score,accepted'");
    }
    MatchRun run;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 5) {
            throw IoError("match file line " + std::to_string(line_no) + ": expected five fields");
        }
        ++run.total_query_frames;
        if (f[1].empty()) {
            ++run.warm_up_frames;
            continue;
        }
        try {
            SequenceMatch m;
            m.query_center_index = static_cast<std::size_t>(std::stoull(f[0]));
            m.reference_center_index = std::stoll(f[1]);
            m.slope = parse_real(f[2]);
            m.score = parse_real(f[3]);
            m.accepted = f[4] == "1";
            run.matches.push_back(m);
        } catch (const std::logic_error& e) {
            throw IoError("match file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return run;
}

} // namespace seqslam
