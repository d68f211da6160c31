#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "seqslam/matching.hpp"

namespace seqslam {

/// Allowed trajectory slopes, as multiples of the average frame-rate ratio
/// v_av (reference frames advanced per query frame).
struct SlopeConfig {
    double v_min = 0.84;
    double v_max = 1.19;
    double v_step = 0.04;
    double v_av = 1.0;

    void validate() const;
    /// v_min, v_min + v_step, ... up to and including v_max.
    std::vector<double> slopes() const;

    bool operator==(const SlopeConfig&) const = default;
};

struct SequenceMatch {
    std::size_t query_center_index = 0;
    /// -1 when no trajectory fit inside the matrix.
    std::int64_t reference_center_index = -1;
    double slope = 0.0;
    double score = 0.0;
    bool accepted = false;
    std::size_t start_row = 0;

    bool operator==(const SequenceMatch&) const = default;
};

/// Row visited at column offset t: floor(start_row + slope * v_av * t + 0.5).
std::int64_t trajectory_row(std::size_t start_row, double slope, double v_av, std::size_t t);

/// Mean score along the line starting at `start_row` in the oldest column.
/// Empty when the line leaves the matrix or touches padding.
std::optional<double> trajectory_score(const DifferenceMatrix& matrix, std::size_t start_row, double slope,
                                       double v_av);

/// Lowest-scoring trajectory over every start row of the oldest column and
/// every configured slope. Ties go to the lower start row, then the lower
/// slope. The result does not depend on `threads`.
/// Throws NotReady until the matrix holds a full window of columns.
SequenceMatch best_match(const DifferenceMatrix& matrix, const SlopeConfig& cfg, double threshold,
                         unsigned threads = 1);

} // namespace seqslam
