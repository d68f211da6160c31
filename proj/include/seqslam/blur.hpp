#pragma once

#include <span>
#include <vector>

#include "seqslam/image.hpp"

namespace seqslam {

/// Simulated long exposure built from a high frame-rate sequence.
struct BlurSpec {
    double exposure_ms = 0.0;
    double source_fps = 0.0;

    /// Frames averaged: round(exposure_ms * source_fps / 1000), half-up.
    /// Throws InvalidInput when that is below one frame.
    int window() const;
};

/// Trailing moving average. Output frame j is the per-pixel mean of input
/// frames j .. j + window - 1 (so it aligns with input frame j + window - 1),
/// rounded half-up. Output length is frames.size() - window + 1.
/// With stride k only outputs 0, k, 2k, ... are produced.
std::vector<GrayImage> temporal_blur(std::span<const GrayImage> frames, int window, std::size_t stride = 1);
std::vector<GrayImage> temporal_blur(std::span<const GrayImage> frames, const BlurSpec& spec);

/// Centroid offset of a trailing window: (window - 1) / 2 frames.
double expected_lag(const BlurSpec& spec);

} // namespace seqslam
