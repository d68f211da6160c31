#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "seqslam/image.hpp"

namespace seqslam::test {

inline GrayImage random_gray(int w, int h, std::mt19937_64& rng, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    GrayImage img(w, h);
    for (auto& p : img.pixels) {
        p = static_cast<std::uint8_t>(dist(rng));
    }
    return img;
}

inline GrayImage from_rows(const std::vector<std::vector<int>>& rows) {
    GrayImage img(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            img.at(x, y) = static_cast<std::uint8_t>(rows[y][x]);
        }
    }
    return img;
}

inline Template random_template(int rx, int ry, std::mt19937_64& rng, std::size_t index = 0) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Template t;
    t.rx = rx;
    t.ry = ry;
    t.source_index = index;
    t.values.resize(static_cast<std::size_t>(rx) * ry);
    for (auto& v : t.values) {
        v = dist(rng);
    }
    return t;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("seqslam_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace seqslam::test
