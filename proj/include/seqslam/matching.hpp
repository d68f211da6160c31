#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "seqslam/image.hpp"

namespace seqslam {

/// Mean absolute difference of two equally sized templates.
double sad_difference(const Template& a, const Template& b);

/// Append-only set of learned templates sharing one geometry. Values are held
/// as 32-bit floats, the same representation as the on-disk format.
class TemplateStore {
public:
    TemplateStore() = default;
    TemplateStore(int rx, int ry, int patch_side);

    /// Appends `t`; its source_index must equal size().
    void learn(const Template& t);

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    int rx() const { return rx_; }
    int ry() const { return ry_; }
    int patch_side() const { return patch_side_; }

    std::span<const float> values(std::size_t k) const;
    /// Template k widened back to double precision.
    Template at(std::size_t k) const;

    bool operator==(const TemplateStore&) const = default;

private:
    friend TemplateStore read_store(std::istream& in);

    int rx_ = 0;
    int ry_ = 0;
    int patch_side_ = 0;
    std::size_t count_ = 0;
    std::vector<float> data_;
};

inline constexpr std::uint32_t kStoreFormatVersion = 1;

/// Binary layout (all little-endian): "SQSM", u32 version, u32 rx, u32 ry,
/// u32 patch side, u32 count, then count * rx * ry float32 values.
void write_store(std::ostream& out, const TemplateStore& store);
TemplateStore read_store(std::istream& in);
void save_store(const std::filesystem::path& path, const TemplateStore& store);
TemplateStore load_store(const std::filesystem::path& path);

struct DifferenceVector {
    std::size_t query_index = 0;
    std::vector<double> scores;

    bool operator==(const DifferenceVector&) const = default;
};

/// scores[k] = sad_difference(store.at(k), query). Slots are computed
/// independently, so the result does not depend on `threads`.
DifferenceVector difference_vector(const TemplateStore& store, const Template& query, unsigned threads = 1);

/// Same comparison over arbitrary templates (used for the unnormalized
/// ranking baselines).
DifferenceVector difference_vector(std::span<const Template> references, const Template& query,
                                   unsigned threads = 1);

/// Local contrast enhancement: each element is z-scored against the elements
/// within +-half_window of it (clipped at the ends), using the sample standard
/// deviation. Windows without spread map to 0. Vectors shorter than two
/// elements are returned unchanged.
DifferenceVector neighborhood_normalize(const DifferenceVector& vec, int half_window);

/// Sliding window over the most recent normalized difference vectors. Column 0
/// is the oldest. Older, shorter columns are padded with a NaN sentinel.
class DifferenceMatrix {
public:
    static constexpr double kPad = std::numeric_limits<double>::quiet_NaN();
    static bool is_pad(double v) { return v != v; }

    explicit DifferenceMatrix(std::size_t window);

    /// Appends the next consecutive frame's vector, evicting the oldest column
    /// once `window` columns are held.
    void push_column(DifferenceVector vec);

    std::size_t window() const { return window_; }
    std::size_t columns() const { return columns_.size(); }
    std::size_t rows() const { return rows_; }
    bool full() const { return columns_.size() == window_; }

    double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
    std::span<const double> column(std::size_t col) const { return columns_[col]; }
    /// Number of real (non-pad) entries in a column.
    std::size_t column_length(std::size_t col) const { return lengths_[col]; }
    std::size_t frame_index(std::size_t col) const { return frames_[col]; }

private:
    std::size_t window_;
    std::size_t rows_ = 0;
    std::deque<std::vector<double>> columns_;
    std::deque<std::size_t> lengths_;
    std::deque<std::size_t> frames_;
};

} // namespace seqslam
