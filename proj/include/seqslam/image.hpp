#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace seqslam {

/// 8-bit image with 1 (gray) or 3 (RGB, interleaved) channels, row-major.
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    bool operator==(const RawImage&) const = default;
};

/// Single channel 8-bit image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

/// Resolution-reduced, patch-normalized image. The unit of place comparison.
struct Template {
    int rx = 0;
    int ry = 0;
    std::vector<double> values;
    std::size_t source_index = 0;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * rx + x]; }

    bool operator==(const Template&) const = default;
};

/// Top-left inclusive rectangle in pixel coordinates.
struct CropRect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;

    bool operator==(const CropRect&) const = default;
};

} // namespace seqslam
