#pragma once

#include <filesystem>
#include <vector>

#include "seqslam/image.hpp"

namespace seqslam {

/// Reads an 8-bit PNG or binary PGM/PPM (P5/P6). Format follows the file
/// extension.
RawImage read_image(const std::filesystem::path& path);

/// Writes a gray image as PNG or binary PGM depending on the extension.
void write_image(const std::filesystem::path& path, const GrayImage& img);

/// Image files in `dir` ordered by the numeric value of their filename stem.
/// Frame ordinal is the position in the returned list.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

std::vector<GrayImage> load_gray_frames(const std::filesystem::path& dir);

} // namespace seqslam
