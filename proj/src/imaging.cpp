#include "seqslam/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqslam/error.hpp"

namespace seqslam {

namespace {

void check_gray(const GrayImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
        throw InvalidInput("gray image dimensions do not match its pixel buffer");
    }
}

} // namespace

GrayImage to_grayscale(const RawImage& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw InvalidInput("unsupported channel count " + std::to_string(img.channels));
    }
    const auto count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    if (img.width <= 0 || img.height <= 0 || img.pixels.size() != count * static_cast<std::size_t>(img.channels)) {
        throw InvalidInput("raw image dimensions do not match its pixel buffer");
    }

    GrayImage out(img.width, img.height);
    if (img.channels == 1) {
        out.pixels = img.pixels;
        return out;
    }
    // Fixed point in units of 1e-4 keeps the half-up rounding exact.
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t r = img.pixels[3 * i];
        const std::uint32_t g = img.pixels[3 * i + 1];
        const std::uint32_t b = img.pixels[3 * i + 2];
        const std::uint32_t scaled = 2989 * r + 5870 * g + 1140 * b;
        out.pixels[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>((scaled + 5000) / 10000, 255));
    }
    return out;
}

GrayImage crop(const GrayImage& img, const CropRect& rect) {
    check_gray(img);
    if (rect.width <= 0 || rect.height <= 0 || rect.x0 < 0 || rect.y0 < 0 ||
        rect.x0 + rect.width > img.width || rect.y0 + rect.height > img.height) {
        throw InvalidInput("crop rectangle exceeds image bounds");
    }
    GrayImage out(rect.width, rect.height);
    for (int y = 0; y < rect.height; ++y) {
        const auto* src = &img.pixels[static_cast<std::size_t>(rect.y0 + y) * img.width + rect.x0];
        std::copy(src, src + rect.width, &out.pixels[static_cast<std::size_t>(y) * rect.width]);
    }
    return out;
}

GrayImage downsample(const GrayImage& img, int rx, int ry) {
    check_gray(img);
    if (rx <= 0 || ry <= 0) {
        throw InvalidInput("downsample target must be positive");
    }
    if (rx > img.width || ry > img.height) {
        throw InvalidInput("downsample cannot upsample");
    }

    auto bound = [](int i, int src, int dst) {
        return static_cast<int>(static_cast<long long>(i) * src / dst);
    };

    GrayImage out(rx, ry);
    for (int oy = 0; oy < ry; ++oy) {
        const int y0 = bound(oy, img.height, ry);
        const int y1 = bound(oy + 1, img.height, ry);
        for (int ox = 0; ox < rx; ++ox) {
            const int x0 = bound(ox, img.width, rx);
            const int x1 = bound(ox + 1, img.width, rx);
            std::uint64_t sum = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    sum += img.at(x, y);
                }
            }
            const auto area = static_cast<std::uint64_t>(x1 - x0) * static_cast<std::uint64_t>(y1 - y0);
            // half-up: floor(sum/area + 1/2)
            out.at(ox, oy) = static_cast<std::uint8_t>((2 * sum + area) / (2 * area));
        }
    }
    return out;
}

std::vector<double> patch_normalize_values(std::span<const double> values, int width, int height,
                                           int patch_side) {
    if (patch_side <= 0) {
        throw InvalidInput("patch side must be positive");
    }
    if (width <= 0 || height <= 0 ||
        values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InvalidInput("image dimensions do not match its buffer");
    }
    if (width % patch_side != 0 || height % patch_side != 0) {
        throw InvalidInput("image dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                           " are not divisible by patch side " + std::to_string(patch_side));
    }

    std::vector<double> out(values.size(), 0.0);
    const double count = static_cast<double>(patch_side) * patch_side;
    auto index = [width](int x, int y) { return static_cast<std::size_t>(y) * width + x; };

    for (int py = 0; py < height; py += patch_side) {
        for (int px = 0; px < width; px += patch_side) {
            double sum = 0.0;
            double largest = 0.0;
            for (int y = py; y < py + patch_side; ++y) {
                for (int x = px; x < px + patch_side; ++x) {
                    sum += values[index(x, y)];
                    largest = std::max(largest, std::abs(values[index(x, y)]));
                }
            }
            const double mean = sum / count;
            double squares = 0.0;
            for (int y = py; y < py + patch_side; ++y) {
                for (int x = px; x < px + patch_side; ++x) {
                    const double d = values[index(x, y)] - mean;
                    squares += d * d;
                }
            }
            const double stddev = std::sqrt(squares / count);
            // Below this the spread is indistinguishable from rounding noise.
            if (stddev <= count * std::numeric_limits<double>::epsilon() * largest) {
                continue;
            }
            for (int y = py; y < py + patch_side; ++y) {
                for (int x = px; x < px + patch_side; ++x) {
                    out[index(x, y)] = (values[index(x, y)] - mean) / stddev;
                }
            }
        }
    }
    return out;
}

Template patch_normalize(const GrayImage& img, int patch_side) {
    check_gray(img);
    const std::vector<double> intensities(img.pixels.begin(), img.pixels.end());
    Template t;
    t.rx = img.width;
    t.ry = img.height;
    t.values = patch_normalize_values(intensities, img.width, img.height, patch_side);
    return t;
}

Template raw_template(const GrayImage& img) {
    check_gray(img);
    Template t;
    t.rx = img.width;
    t.ry = img.height;
    t.values.assign(img.pixels.begin(), img.pixels.end());
    return t;
}

} // namespace seqslam
