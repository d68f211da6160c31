#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqslam/image.hpp"
#include "seqslam/sequence.hpp"

namespace seqslam {

/// Everything a batch run needs. Keys of the flat `key = value` config file
/// are the long CLI flag names (see config_keys()).
struct RunConfig {
    std::string reference_dir;
    std::string query_dir;
    std::string ground_truth;
    std::optional<CropRect> reference_crop;
    std::optional<CropRect> query_crop;
    int rx = 64;
    int ry = 48;
    int patch_side = 8;
    std::size_t sequence_length = 50;
    int half_window = 10;
    SlopeConfig slope;
    /// Explicit reference-frames-per-query-frame ratio; derived when absent.
    std::optional<double> v_av;
    /// Acceptance threshold s_m; when absent the zero-false-positive
    /// threshold from the sweep is used.
    std::optional<double> threshold;
    double fp_tolerance = 10.0;
    std::optional<double> reference_spacing;
    std::optional<double> query_spacing;
    unsigned threads = 0;
    bool online = false;
    int histogram_bins = 100;
    std::vector<double> exposures;
    double source_fps = 15.0;
    /// Blur sweep keeps every blur_stride-th blurred frame.
    int blur_stride = 1;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// v_av: explicit value, else query_spacing / reference_spacing, else
    /// reference_frames / query_frames over the shared route.
    double resolve_v_av(std::size_t reference_frames, std::size_t query_frames) const;

    bool operator==(const RunConfig&) const = default;
};

std::span<const std::string_view> config_keys();

/// Sets one field from its textual form. Throws ConfigError on unknown keys
/// or malformed values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Emits every set field in config_keys() order. Reals use 17 significant
/// digits so parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

} // namespace seqslam
