#include "seqslam/blur.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "seqslam/error.hpp"

namespace seqslam {

int BlurSpec::window() const {
    if (!(exposure_ms > 0.0) || !(source_fps > 0.0)) {
        throw InvalidInput("blur exposure and source frame rate must be positive");
    }
    const double frames = std::floor(exposure_ms * source_fps / 1000.0 + 0.5);
    if (frames < 1.0) {
        throw InvalidInput("exposure of " + std::to_string(exposure_ms) + " ms is shorter than one source frame");
    }
    return static_cast<int>(frames);
}

std::vector<GrayImage> temporal_blur(std::span<const GrayImage> frames, int window, std::size_t stride) {
    if (window < 1) {
        throw InvalidInput("blur window must be at least one frame");
    }
    if (stride == 0) {
        throw InvalidInput("blur output stride must be positive");
    }
    if (static_cast<std::size_t>(window) > frames.size()) {
        throw InvalidInput("blur window of " + std::to_string(window) + " frames exceeds the sequence length " +
                           std::to_string(frames.size()));
    }
    const int w = frames.front().width;
    const int h = frames.front().height;
    for (const auto& f : frames) {
        if (f.width != w || f.height != h) {
            throw InvalidInput("all frames must share dimensions");
        }
    }

    const std::size_t pixels = frames.front().pixels.size();
    // Integer running sums are exact, so rounding happens once per output.
    std::vector<std::uint64_t> sum(pixels, 0);
    const auto win = static_cast<std::uint64_t>(window);
    std::vector<GrayImage> out;
    out.reserve((frames.size() - window) / stride + 1);
    for (std::size_t t = 0; t < frames.size(); ++t) {
        for (std::size_t p = 0; p < pixels; ++p) {
            sum[p] += frames[t].pixels[p];
        }
        if (t + 1 < static_cast<std::size_t>(window)) {
            continue;
        }
        if (t >= static_cast<std::size_t>(window)) {
            for (std::size_t p = 0; p < pixels; ++p) {
                sum[p] -= frames[t - window].pixels[p];
            }
        }
        if ((t + 1 - win) % stride != 0) {
            continue;
        }
        GrayImage blurred(w, h);
        for (std::size_t p = 0; p < pixels; ++p) {
            blurred.pixels[p] = static_cast<std::uint8_t>((2 * sum[p] + win) / (2 * win));
        }
        out.push_back(std::move(blurred));
    }
    return out;
}

std::vector<GrayImage> temporal_blur(std::span<const GrayImage> frames, const BlurSpec& spec) {
    return temporal_blur(frames, spec.window());
}

double expected_lag(const BlurSpec& spec) {
    return (spec.window() - 1) / 2.0;
}

} // namespace seqslam
