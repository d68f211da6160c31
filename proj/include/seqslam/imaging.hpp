#pragma once

#include <span>

#include "seqslam/image.hpp"

namespace seqslam {

/// Luma conversion I = 0.2989 R + 0.5870 G + 0.1140 B, rounded half-up.
/// Single channel input is returned unchanged.
GrayImage to_grayscale(const RawImage& img);

GrayImage crop(const GrayImage& img, const CropRect& rect);

/// Area (block-mean) downsampling. Output pixel (i, j) averages source columns
/// [floor(i*W/rx), floor((i+1)*W/rx)) and the analogous row range.
GrayImage downsample(const GrayImage& img, int rx, int ry);

/// Z-scores every non-overlapping n_p x n_p patch using the population
/// standard deviation. Patches without variance become all zeros.
Template patch_normalize(const GrayImage& img, int patch_side);

/// Real-valued variant of patch_normalize used where inputs are not 8-bit
/// (raw-intensity baselines, invariance checks).
std::vector<double> patch_normalize_values(std::span<const double> values, int width, int height,
                                           int patch_side);

/// Template holding the raw intensities, no normalization applied.
Template raw_template(const GrayImage& img);

} // namespace seqslam
