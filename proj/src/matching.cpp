#include "seqslam/matching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqslam/error.hpp"
#include "seqslam/parallel.hpp"

namespace seqslam {

namespace {

// Shared by every SAD entry point so stored (float) and in-memory (double)
// templates produce bit-identical scores.
template <typename T>
double mean_abs_difference(std::span<const T> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(static_cast<double>(a[i]) - b[i]);
    }
    return sum / static_cast<double>(a.size());
}

void check_template(const Template& t) {
    if (t.rx <= 0 || t.ry <= 0 || t.values.size() != static_cast<std::size_t>(t.rx) * static_cast<std::size_t>(t.ry)) {
        throw InvalidInput("template dimensions do not match its values");
    }
}

} // namespace

double sad_difference(const Template& a, const Template& b) {
    check_template(a);
    check_template(b);
    if (a.rx != b.rx || a.ry != b.ry) {
        throw InvalidInput("template dimension mismatch: " + std::to_string(a.rx) + "x" + std::to_string(a.ry) +
                           " vs " + std::to_string(b.rx) + "x" + std::to_string(b.ry));
    }
    return mean_abs_difference<double>(a.values, b.values);
}

TemplateStore::TemplateStore(int rx, int ry, int patch_side) : rx_(rx), ry_(ry), patch_side_(patch_side) {
    if (rx <= 0 || ry <= 0 || patch_side <= 0) {
        throw InvalidInput("template store geometry must be positive");
    }
    if (rx % patch_side != 0 || ry % patch_side != 0) {
        throw InvalidInput("template dimensions must be divisible by the patch side");
    }
}

void TemplateStore::learn(const Template& t) {
    check_template(t);
    if (t.rx != rx_ || t.ry != ry_) {
        throw InvalidInput("template geometry does not match the store");
    }
    if (t.source_index != count_) {
        throw InvalidInput("template source index " + std::to_string(t.source_index) + " learned out of order (expected " +
                           std::to_string(count_) + ")");
    }
    data_.reserve(data_.size() + t.values.size());
    for (double v : t.values) {
        data_.push_back(static_cast<float>(v));
    }
    ++count_;
}

std::span<const float> TemplateStore::values(std::size_t k) const {
    const std::size_t stride = static_cast<std::size_t>(rx_) * static_cast<std::size_t>(ry_);
    return std::span<const float>(data_).subspan(k * stride, stride);
}

Template TemplateStore::at(std::size_t k) const {
    if (k >= count_) {
        throw InvalidInput("template index out of range");
    }
    const auto v = values(k);
    Template t;
    t.rx = rx_;
    t.ry = ry_;
    t.values.assign(v.begin(), v.end());
    t.source_index = k;
    return t;
}

DifferenceVector difference_vector(const TemplateStore& store, const Template& query, unsigned threads) {
    check_template(query);
    DifferenceVector out;
    out.query_index = query.source_index;
    if (store.empty()) {
        return out;
    }
    if (query.rx != store.rx() || query.ry != store.ry()) {
        throw InvalidInput("query geometry does not match the template store");
    }
    out.scores.resize(store.size());
    parallel_chunks(store.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            out.scores[k] = mean_abs_difference<float>(store.values(k), query.values);
        }
    });
    return out;
}

DifferenceVector difference_vector(std::span<const Template> references, const Template& query, unsigned threads) {
    check_template(query);
    for (const auto& r : references) {
        if (r.rx != query.rx || r.ry != query.ry || r.values.size() != query.values.size()) {
            throw InvalidInput("reference geometry does not match the query");
        }
    }
    DifferenceVector out;
    out.query_index = query.source_index;
    out.scores.resize(references.size());
    parallel_chunks(references.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            out.scores[k] = mean_abs_difference<double>(references[k].values, query.values);
        }
    });
    return out;
}

DifferenceVector neighborhood_normalize(const DifferenceVector& vec, int half_window) {
    if (half_window < 1) {
        throw InvalidInput("neighborhood half window must be at least 1");
    }
    const auto& d = vec.scores;
    if (d.size() < 2) {
        return vec;
    }
    const auto len = static_cast<std::ptrdiff_t>(d.size());
    DifferenceVector out;
    out.query_index = vec.query_index;
    out.scores.resize(d.size());
    for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half_window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, k + half_window);
        const auto m = static_cast<double>(hi - lo + 1);
        double sum = 0.0;
        double largest = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            sum += d[j];
            largest = std::max(largest, std::abs(d[j]));
        }
        const double mean = sum / m;
        double squares = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            squares += (d[j] - mean) * (d[j] - mean);
        }
        const double stddev = std::sqrt(squares / (m - 1.0));
        if (stddev <= m * std::numeric_limits<double>::epsilon() * largest) {
            out.scores[k] = 0.0;
        } else {
            out.scores[k] = (d[k] - mean) / stddev;
        }
    }
    return out;
}

DifferenceMatrix::DifferenceMatrix(std::size_t window) : window_(window) {
    if (window == 0) {
        throw InvalidInput("difference matrix window must be positive");
    }
}

void DifferenceMatrix::push_column(DifferenceVector vec) {
    if (!frames_.empty() && vec.query_index != frames_.back() + 1) {
        throw InvalidInput("difference vector for frame " + std::to_string(vec.query_index) +
                           " pushed out of order (expected " + std::to_string(frames_.back() + 1) + ")");
    }
    if (columns_.size() == window_) {
        columns_.pop_front();
        lengths_.pop_front();
        frames_.pop_front();
    }
    const std::size_t length = vec.scores.size();
    rows_ = std::max(rows_, length);
    // Columns are never longer than the newest in the streaming case, but a
    // shorter newest column is padded as well so the matrix stays rectangular.
    auto scores = std::move(vec.scores);
    scores.resize(rows_, kPad);
    for (auto& col : columns_) {
        col.resize(rows_, kPad);
    }
    columns_.push_back(std::move(scores));
    lengths_.push_back(length);
    frames_.push_back(vec.query_index);
}

} // namespace seqslam
