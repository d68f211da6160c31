#include "seqslam/sequence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqslam/error.hpp"
#include "seqslam/parallel.hpp"

namespace seqslam {

void SlopeConfig::validate() const {
    if (!(v_min > 0.0) || !(v_max >= v_min)) {
        throw InvalidInput("slope range requires 0 < v_min <= v_max");
    }
    if (!(v_step > 0.0)) {
        throw InvalidInput("slope step must be positive");
    }
    if (!(v_av > 0.0) || !std::isfinite(v_av)) {
        throw InvalidInput("average frame-rate ratio must be positive");
    }
}

std::vector<double> SlopeConfig::slopes() const {
    validate();
    std::vector<double> out;
    // Tolerance absorbs the representation error of decimal steps.
    const double limit = v_max + 1e-9 * v_step;
    for (std::size_t k = 0;; ++k) {
        const double m = v_min + static_cast<double>(k) * v_step;
        if (m > limit) {
            break;
        }
        out.push_back(m);
    }
    return out;
}

std::int64_t trajectory_row(std::size_t start_row, double slope, double v_av, std::size_t t) {
    return static_cast<std::int64_t>(
        std::floor(static_cast<double>(start_row) + slope * v_av * static_cast<double>(t) + 0.5));
}

std::optional<double> trajectory_score(const DifferenceMatrix& matrix, std::size_t start_row, double slope,
                                       double v_av) {
    const std::size_t n = matrix.columns();
    if (n == 0) {
        return std::nullopt;
    }
    const auto rows = static_cast<std::int64_t>(matrix.rows());
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const std::int64_t r = trajectory_row(start_row, slope, v_av, t);
        if (r < 0 || r >= rows) {
            return std::nullopt;
        }
        const double v = matrix.at(static_cast<std::size_t>(r), t);
        if (DifferenceMatrix::is_pad(v)) {
            return std::nullopt;
        }
        sum += v;
    }
    return sum / static_cast<double>(n);
}

SequenceMatch best_match(const DifferenceMatrix& matrix, const SlopeConfig& cfg, double threshold, unsigned threads) {
    if (!matrix.full()) {
        throw NotReady("difference matrix holds " + std::to_string(matrix.columns()) + " of " +
                       std::to_string(matrix.window()) + " columns");
    }
    const std::vector<double> slopes = cfg.slopes();
    const std::size_t starts = matrix.column_length(0);
    const std::size_t n = matrix.columns();
    const auto rows = static_cast<std::int64_t>(matrix.rows());

    struct Best {
        double score = std::numeric_limits<double>::infinity();
        std::size_t start = 0;
        std::size_t slope_index = 0;
        bool found = false;
    };

    std::vector<Best> partial(chunk_count(starts, threads));
    parallel_chunks(starts, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Best best;
        for (std::size_t start = begin; start < end; ++start) {
            for (std::size_t s = 0; s < slopes.size(); ++s) {
                // Rows increase with t, so the last sample bounds the whole line.
                if (trajectory_row(start, slopes[s], cfg.v_av, n - 1) >= rows) {
                    continue;
                }
                const auto score = trajectory_score(matrix, start, slopes[s], cfg.v_av);
                if (score && (!best.found || *score < best.score)) {
                    best = Best{*score, start, s, true};
                }
            }
        }
        partial[chunk] = best;
    });

    // Chunks cover ascending start rows, so a strict comparison in chunk order
    // keeps the documented tie-break.
    Best best;
    for (const auto& p : partial) {
        if (p.found && (!best.found || p.score < best.score)) {
            best = p;
        }
    }

    SequenceMatch match;
    const std::size_t mid = (n - 1) / 2;
    match.query_center_index = matrix.frame_index(mid);
    if (!best.found) {
        match.score = std::numeric_limits<double>::infinity();
        return match;
    }
    match.start_row = best.start;
    match.slope = slopes[best.slope_index];
    match.score = best.score;
    match.reference_center_index = trajectory_row(best.start, match.slope, cfg.v_av, mid);
    match.accepted = best.score < threshold;
    return match;
}

} // namespace seqslam
