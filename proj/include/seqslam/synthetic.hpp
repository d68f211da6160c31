#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "seqslam/eval.hpp"
#include "seqslam/image.hpp"

namespace seqslam::synth {

/// Procedural roadside panorama: flat sky above a slowly varying skyline
/// (hills, trees, buildings), textured scenery with poles, and a flat road
/// band. Views are horizontal windows into it, so a traverse is a 1-D scan.
class Scene {
public:
    Scene(int length, int height, std::uint64_t seed);

    int length() const { return length_; }
    int height() const { return height_; }
    /// Intensity at integer column x, row y.
    float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * length_ + x]; }

    /// View of `width` columns starting at fractional column `x`, linearly
    /// interpolated and rounded half-up.
    GrayImage render(double x, int width) const;

private:
    int length_;
    int height_;
    std::vector<float> values_;
};

/// Evenly spaced view positions: start + k * step.
std::vector<double> uniform_positions(std::size_t count, double step, double start = 0.0);

/// View positions whose per-frame speed (relative to `base_step`) wanders
/// smoothly inside [speed_min, speed_max] with per-frame drift
/// drift * (speed_max - speed_min). Stops before exceeding `end`.
std::vector<double> jittered_positions(double start, double end, double base_step, double speed_min,
                                       double speed_max, std::mt19937_64& rng, double drift = 0.03);

std::vector<GrayImage> render_traverse(const Scene& scene, const std::vector<double>& positions, int width);

/// Camera-fixed illumination change: a gain and offset per rectangular region,
/// an overexposed band at the bottom (headlights) and additive Gaussian noise.
struct NightParams {
    int region_size = 32;
    double gain_min = 0.05;
    double gain_max = 0.25;
    double offset_min = 2.0;
    double offset_max = 20.0;
    double noise_sigma = 12.0;
    double headlight_fraction = 0.25;
    double headlight_level = 255.0;
};

class NightDistortion {
public:
    NightDistortion(int width, int height, const NightParams& params, std::mt19937_64& rng);
    GrayImage apply(const GrayImage& day, std::mt19937_64& rng) const;

private:
    int width_;
    int height_;
    NightParams params_;
    std::vector<double> gains_;
    std::vector<double> offsets_;
};

/// Additive Gaussian noise, clamped and rounded half-up.
GrayImage add_noise(const GrayImage& img, double sigma, std::mt19937_64& rng);

/// Ground truth anchors every `interval` query frames (plus the last frame):
/// reference position = query view position / reference step.
GroundTruth truth_from_positions(const std::vector<double>& query_positions, double reference_step,
                                 std::size_t interval);

double mean_spacing(const std::vector<double>& positions);

struct RouteParams {
    std::uint64_t seed = 7;
    std::size_t reference_frames = 600;
    int view_width = 128;
    int view_height = 96;
    double reference_step = 6.0;
    double speed_min = 0.84;
    double speed_max = 1.19;
    std::size_t anchor_interval = 5;
    NightParams night;
};

/// Day reference traverse and a night query traverse over the same route.
struct DayNightPair {
    std::vector<GrayImage> reference;
    std::vector<GrayImage> query;
    GroundTruth truth;
    /// Reference frames advanced per query frame.
    double v_av = 1.0;
};

DayNightPair make_day_night_pair(const RouteParams& params);

/// Day reference traverse and a dense day "video" over the first
/// `route_fraction` of the route, advancing `video_step_ratio` reference
/// frames per video frame, for temporal blur experiments.
struct VideoRoute {
    std::vector<GrayImage> reference;
    std::vector<GrayImage> video;
    GroundTruth truth;
    double v_av = 1.0;
};

VideoRoute make_video_route(const RouteParams& params, double video_step_ratio, double route_fraction,
                            double noise_sigma);

} // namespace seqslam::synth
