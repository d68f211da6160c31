#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "seqslam/error.hpp"
#include "seqslam/eval.hpp"
#include "support.hpp"

using namespace seqslam;

namespace {

GroundTruth anchors(std::vector<std::pair<double, double>> pairs, std::optional<double> ref_spacing = std::nullopt) {
    GroundTruth gt;
    for (auto [q, r] : pairs) {
        gt.anchors.push_back({q, r});
    }
    gt.reference_spacing = ref_spacing;
    return gt;
}

SequenceMatch match(std::size_t q, std::int64_t r, double score = 0.0, bool accepted = true) {
    SequenceMatch m;
    m.query_center_index = q;
    m.reference_center_index = r;
    m.score = score;
    m.accepted = accepted;
    m.slope = 1.0;
    return m;
}

const GroundTruth kDiagonal = anchors({{0, 0}, {100, 100}}, 2.5);

} // namespace

TEST_CASE("interpolate_truth oracles") {
    const auto gt = anchors({{0, 0}, {10, 20}, {20, 25}});
    CHECK(interpolate_truth(gt, 0) == 0.0);
    CHECK(interpolate_truth(gt, 10) == 20.0);
    CHECK(interpolate_truth(gt, 20) == 25.0);
    CHECK(interpolate_truth(anchors({{0, 0}, {10, 20}}), 5) == 10.0);
    CHECK(interpolate_truth(gt, 15) == doctest::Approx(22.5));
    CHECK_THROWS_AS(interpolate_truth(gt, -0.5), OutOfRange);
    CHECK_THROWS_AS(interpolate_truth(gt, 20.5), OutOfRange);
}

TEST_CASE("interpolate_truth is monotone") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> step(0.1, 5.0);
    GroundTruth gt;
    double q = 0, r = 0;
    for (int i = 0; i < 30; ++i) {
        gt.anchors.push_back({q, r});
        q += step(rng);
        r += step(rng);
    }
    double previous = -1;
    for (double x = 0; x <= gt.last_query(); x += 0.37) {
        const double v = interpolate_truth(gt, x);
        CHECK(v >= previous);
        previous = v;
    }
}

TEST_CASE("ground truth validation") {
    CHECK_THROWS_AS(anchors({{0, 0}}).validate(), InvalidInput);
    CHECK_THROWS_AS(anchors({{0, 0}, {0, 5}}).validate(), InvalidInput);
    CHECK_THROWS_AS(anchors({{0, 5}, {3, 5}}).validate(), InvalidInput);
    CHECK_NOTHROW(anchors({{0, 0}, {1, 1}}).validate());
}

TEST_CASE("ground truth csv") {
    std::istringstream in("query_frame,reference_frame\n0,0\n10,20\n\n20,25.5\n");
    const GroundTruth gt = read_ground_truth(in);
    REQUIRE(gt.anchors.size() == 3);
    CHECK(gt.anchors[2].reference_frame == 25.5);
    std::ostringstream out;
    write_ground_truth(out, gt);
    std::istringstream back(out.str());
    CHECK(read_ground_truth(back).anchors == gt.anchors);

    std::istringstream bad_header("a,b\n0,0\n1,1\n");
    CHECK_THROWS_AS(read_ground_truth(bad_header), IoError);
    std::istringstream bad_row("query_frame,reference_frame\n0,0\n1\n");
    CHECK_THROWS_AS(read_ground_truth(bad_row), IoError);
    std::istringstream bad_number("query_frame,reference_frame\n0,0\n1,x\n");
    CHECK_THROWS_AS(read_ground_truth(bad_number), IoError);
    std::istringstream decreasing("query_frame,reference_frame\n0,0\n5,5\n3,6\n");
    CHECK_THROWS(read_ground_truth(decreasing));
    CHECK_THROWS_AS(load_ground_truth("/nonexistent/gt.csv"), IoError);
}

TEST_CASE("query_frame_at inverts interpolate_truth") {
    const auto gt = anchors({{0, 0}, {10, 20}, {30, 40}});
    CHECK(query_frame_at(gt, 0) == 0.0);
    CHECK(query_frame_at(gt, 15) == 7.5);
    CHECK(query_frame_at(gt, 20) == 10.0);
    CHECK(query_frame_at(gt, 30) == 20.0);
    for (double q = 0; q <= 30; q += 0.25) {
        CHECK(query_frame_at(gt, interpolate_truth(gt, q)) == doctest::Approx(q));
    }
    CHECK_THROWS_AS(query_frame_at(gt, -0.5), OutOfRange);
    CHECK_THROWS_AS(query_frame_at(gt, 40.5), OutOfRange);
}

TEST_CASE("reindex_query_frames") {
    const auto gt = anchors({{0, 0}, {10, 20}, {30, 40}});
    const auto shifted = reindex_query_frames(gt, 4);
    for (double j = 0; j <= 26; j += 0.5) {
        CHECK(interpolate_truth(shifted, j) == doctest::Approx(interpolate_truth(gt, j + 4)));
    }
    const auto strided = reindex_query_frames(gt, 4, 3);
    for (double j = 0; j <= 8.5; j += 0.5) {
        CHECK(interpolate_truth(strided, j) == doctest::Approx(interpolate_truth(gt, 4 + 3 * j)));
    }
    CHECK_THROWS_AS(reindex_query_frames(gt, 0, 0), InvalidInput);
}

TEST_CASE("score_matches basics") {
    MatchRun run;
    run.total_query_frames = 10;
    run.warm_up_frames = 4;
    for (std::size_t q = 2; q < 8; ++q) {
        run.matches.push_back(match(q, static_cast<std::int64_t>(q)));
    }

    SUBCASE("exact matches") {
        const auto r = score_matches(run, kDiagonal, 10);
        CHECK(r.recall == doctest::Approx(0.6));
        CHECK(r.mean_error_frames == 0.0);
        CHECK(r.max_error_frames == 0.0);
        CHECK(r.false_positive_count == 0);
        CHECK(r.warm_up_frames == 4);
        CHECK(r.recall <= double(r.total_frames - r.warm_up_frames) / r.total_frames);
    }
    SUBCASE("errors, false positives and meters") {
        run.matches[0].reference_center_index = 5;  // error 3
        run.matches[1].reference_center_index = 30; // false positive
        run.matches[2].accepted = false;
        const auto r = score_matches(run, kDiagonal, 10);
        CHECK(r.accepted_count == 5);
        CHECK(r.false_positive_count == 1);
        CHECK(r.correct_count == 4);
        CHECK(r.recall == doctest::Approx(0.4));
        CHECK(r.max_error_frames == 3.0);
        CHECK(r.mean_error_frames == doctest::Approx(0.75));
        CHECK(r.mean_signed_offset_frames == doctest::Approx(-0.75));
        CHECK(r.mean_error_meters == r.mean_error_frames * 2.5);
        CHECK(r.max_error_meters == r.max_error_frames * 2.5);
    }
    SUBCASE("tolerance boundary is inclusive") {
        run.matches[0].reference_center_index = 12; // error exactly 10
        CHECK(score_matches(run, kDiagonal, 10).false_positive_count == 0);
        CHECK(score_matches(run, kDiagonal, 9.5).false_positive_count == 1);
    }
    SUBCASE("empty match list") {
        MatchRun empty;
        empty.total_query_frames = 5;
        const auto r = score_matches(empty, kDiagonal, 10);
        CHECK(r.recall == 0.0);
        CHECK(r.accepted_count == 0);
    }
    SUBCASE("without spacing the meter fields are undefined") {
        const auto r = score_matches(run, anchors({{0, 0}, {100, 100}}), 10);
        CHECK(std::isnan(r.mean_error_meters));
    }
}

TEST_CASE("warm-up ceiling for a perfect matcher") {
    const std::size_t frames = 740, n = 50;
    MatchRun run;
    run.total_query_frames = frames;
    run.warm_up_frames = n - 1;
    for (std::size_t i = n - 1; i < frames; ++i) {
        const std::size_t centre = i - (n - 1) + (n - 1) / 2;
        run.matches.push_back(match(centre, static_cast<std::int64_t>(centre)));
    }
    const auto r = score_matches(run, anchors({{0, 0}, {1000, 1000}}), 10);
    CHECK(r.correct_count == 691);
    CHECK(r.recall == doctest::Approx(691.0 / 740.0));
}

TEST_CASE("sweep_threshold") {
    MatchRun run;
    run.total_query_frames = 6;
    run.matches = {match(0, 0, 0.1), match(1, 1, 0.2), match(2, 40, 0.3), match(3, 3, 0.4), match(4, 4, 0.2)};

    const auto sweep = sweep_threshold(run, kDiagonal, 10);
    REQUIRE(sweep.points.size() >= 2);
    CHECK(sweep.points.front().threshold == -std::numeric_limits<double>::infinity());
    CHECK(sweep.points.front().report.recall == 0.0);
    CHECK(sweep.points.back().threshold == std::numeric_limits<double>::infinity());
    CHECK(sweep.points.back().report.accepted_count == 5);
    CHECK(sweep.points.back().report.false_positive_count == 1);
    // Best zero-FP threshold admits 0.1 and both 0.2 scores, stops before 0.3.
    CHECK(sweep.best_threshold == doctest::Approx(0.25));
    CHECK(sweep.best_report.correct_count == 3);
    CHECK(sweep.best_report.false_positive_count == 0);

    SUBCASE("zero-FP recall is monotone in the tolerance") {
        double previous = 2.0;
        for (double tol : {50.0, 20.0, 10.0, 5.0, 1.0, 0.0}) {
            run.matches[3].reference_center_index = 5; // error 2
            const double recall = sweep_threshold(run, kDiagonal, tol).best_report.recall;
            CHECK(recall <= previous);
            previous = recall;
        }
    }
    SUBCASE("explicit thresholds") {
        const std::vector<double> ths{0.15, 0.35};
        const auto s = sweep_threshold(run, kDiagonal, 10, ths);
        REQUIRE(s.points.size() == 2);
        CHECK(s.points[0].report.correct_count == 1);
        CHECK(s.points[1].report.false_positive_count == 1);
        CHECK(s.best_threshold == 0.15);
    }
    SUBCASE("no zero-FP threshold falls back to rejecting everything") {
        MatchRun bad;
        bad.total_query_frames = 1;
        bad.matches = {match(0, 50, 0.1)};
        const std::vector<double> ths{1.0};
        const auto s = sweep_threshold(bad, kDiagonal, 10, ths);
        CHECK(s.best_threshold == -std::numeric_limits<double>::infinity());
        CHECK(s.best_report.accepted_count == 0);
    }
}

TEST_CASE("apply_threshold never accepts a missing match") {
    MatchRun run;
    run.matches = {match(0, -1, -5.0), match(1, 1, 0.5)};
    const auto t = apply_threshold(run, 1.0);
    CHECK_FALSE(t.matches[0].accepted);
    CHECK(t.matches[1].accepted);
    CHECK_FALSE(apply_threshold(run, 0.5).matches[1].accepted);
}

TEST_CASE("ranking on identical datasets is a step at rank one") {
    std::mt19937_64 rng(6);
    std::vector<GrayImage> frames;
    for (int i = 0; i < 30; ++i) {
        frames.push_back(test::random_gray(16, 8, rng));
    }
    const auto gt = anchors({{0, 0}, {29, 29}});
    for (RankVariant v : all_rank_variants()) {
        // A window spanning the whole vector makes neighbourhood normalization one affine map.
        const auto dist = ranking_analysis(frames, frames, gt, v, RankingOptions{8, 30, 10, 1});
        CHECK(dist.ranks.size() == 30);
        CHECK(dist.skipped == 0);
        for (auto r : dist.ranks) {
            CHECK(r == 1);
        }
        CHECK(dist.top1_rate() == 1.0);
        CHECK(dist.mean_percentile() == 0.0);
        CHECK(dist.histogram.size() == 10);
        CHECK(dist.histogram[0] == 30);
        REQUIRE(dist.cumulative.size() == 101);
        CHECK(dist.cumulative.front() == 1.0);
        CHECK(dist.cumulative.back() == 1.0);
    }
}

TEST_CASE("ranking percentiles, ties and skipped queries") {
    // References 0..4 are flat images of increasing intensity.
    std::vector<GrayImage> refs;
    for (int i = 0; i < 5; ++i) {
        refs.push_back(GrayImage(8, 8, static_cast<std::uint8_t>(10 * i)));
    }
    // Query 0 equals reference 4; truth says reference 0, which is the worst.
    // Query 1 lies outside the ground truth.
    std::vector<GrayImage> queries{GrayImage(8, 8, 40), GrayImage(8, 8, 0)};
    const auto gt = anchors({{0, 0}, {0.5, 0.5}});
    const auto dist = ranking_analysis(refs, queries, gt, RankVariant::raw, RankingOptions{8, 2, 4, 1});
    REQUIRE(dist.ranks.size() == 1);
    CHECK(dist.ranks[0] == 5);
    CHECK(dist.percentiles[0] == 1.0);
    CHECK(dist.skipped == 1);
    CHECK(dist.histogram.back() == 1);
    CHECK(dist.cumulative[99] == 0.0);
    CHECK(dist.cumulative[100] == 1.0);

    // Every flat image normalizes to zeros, so all scores tie: the tie goes to the correct frame.
    const auto tied = ranking_analysis(refs, queries, gt, RankVariant::patch_only, RankingOptions{8, 2, 4, 1});
    CHECK(tied.ranks[0] == 1);

    CHECK_THROWS_AS(ranking_analysis(std::span(refs).first(1), queries, gt, RankVariant::raw, {}), InvalidInput);
    CHECK_THROWS_AS(ranking_analysis(refs, queries, gt, RankVariant::raw, RankingOptions{8, 2, 0, 1}), InvalidInput);
}

TEST_CASE("cumulative ranking curve is monotone and ends at one") {
    std::mt19937_64 rng(12);
    std::vector<GrayImage> refs, queries;
    for (int i = 0; i < 40; ++i) {
        refs.push_back(test::random_gray(16, 8, rng));
        queries.push_back(test::random_gray(16, 8, rng));
    }
    const auto gt = anchors({{0, 0}, {39, 39}});
    const auto dist = ranking_analysis(refs, queries, gt, RankVariant::both, RankingOptions{8, 5, 100, 1});
    for (std::size_t x = 1; x < dist.cumulative.size(); ++x) {
        CHECK(dist.cumulative[x] >= dist.cumulative[x - 1]);
    }
    CHECK(dist.cumulative.back() == 1.0);
    for (double p : dist.percentiles) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("match csv round trip keeps warm-up bookkeeping") {
    MatchRun run;
    run.total_query_frames = 6;
    run.warm_up_frames = 2;
    run.matches = {match(1, 3, -1.25), match(2, 4, 0.5, false), match(3, -1, std::numeric_limits<double>::infinity(), false),
                   match(4, 6, -2.0)};
    std::ostringstream out;
    write_matches_csv(out, run);
    CHECK(out.str().rfind("query_index,reference_index,slope,score,accepted\n0,,,,0\n1,,,,0\n1,3,1,-1.25,1\n", 0) == 0);
    CHECK(out.str().find("3,-1,1,inf,0") != std::string::npos);
    std::istringstream in(out.str());
    const MatchRun back = read_matches_csv(in);
    CHECK(back.total_query_frames == 6);
    CHECK(back.warm_up_frames == 2);
    CHECK(back.matches == run.matches);

    std::istringstream bad("query_index,reference_index\n");
    CHECK_THROWS_AS(read_matches_csv(bad), IoError);
}

TEST_CASE("report and plot csv layouts") {
    EvalReport r;
    r.recall = 0.5;
    r.total_frames = 4;
    std::ostringstream out;
    write_report_csv(out, r, 0.25);
    CHECK(out.str().rfind("metric,value\nthreshold,0.25\nrecall,0.5\n", 0) == 0);

    MatchRun run;
    run.matches = {match(3, 4, 0.0), match(4, 4, 0.0, false)};
    std::ostringstream mv;
    write_matches_vs_truth_csv(mv, run, kDiagonal);
    CHECK(mv.str() == "query,reported,truth\n3,4,3\n");

    RankingDistribution d;
    d.histogram = {1, 2};
    d.cumulative = {0.5, 1.0};
    std::ostringstream h, c;
    write_rank_histogram_csv(h, d);
    write_rank_cumulative_csv(c, d);
    CHECK(h.str() == "bin_low,bin_high,count\n0,0.5,1\n0.5,1,2\n");
    CHECK(c.str() == "top_percent,fraction\n0,0.5\n1,1\n");
}
