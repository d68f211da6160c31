#include "seqslam/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "seqslam/error.hpp"

namespace seqslam::synth {

namespace {

double smoothstep(double t) {
    return t * t * (3.0 - 2.0 * t);
}

// Lattice value noise in [0, 1].
class Noise1D {
public:
    Noise1D(std::size_t cells, std::mt19937_64& rng) : lattice_(cells + 2) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& v : lattice_) {
            v = u(rng);
        }
    }
    double operator()(double x) const {
        const auto i = static_cast<std::size_t>(std::floor(x));
        const double f = smoothstep(x - std::floor(x));
        return lattice_[i] * (1.0 - f) + lattice_[i + 1] * f;
    }

private:
    std::vector<double> lattice_;
};

class Noise2D {
public:
    Noise2D(std::size_t cols, std::size_t rows, std::mt19937_64& rng) : cols_(cols + 2), lattice_((cols + 2) * (rows + 2)) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& v : lattice_) {
            v = u(rng);
        }
    }
    double operator()(double x, double y) const {
        const auto i = static_cast<std::size_t>(std::floor(x));
        const auto j = static_cast<std::size_t>(std::floor(y));
        const double fx = smoothstep(x - std::floor(x));
        const double fy = smoothstep(y - std::floor(y));
        auto v = [&](std::size_t a, std::size_t b) { return lattice_[b * cols_ + a]; };
        const double top = v(i, j) * (1.0 - fx) + v(i + 1, j) * fx;
        const double bottom = v(i, j + 1) * (1.0 - fx) + v(i + 1, j + 1) * fx;
        return top * (1.0 - fy) + bottom * fy;
    }

private:
    std::size_t cols_;
    std::vector<double> lattice_;
};

std::uint8_t to_pixel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace

Scene::Scene(int length, int height, std::uint64_t seed)
    : length_(length), height_(height), values_(static_cast<std::size_t>(length) * height) {
    if (length <= 0 || height <= 0) {
        throw InvalidInput("scene dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = height;

    // Skyline: long hills decide how much open sky a view holds.
    const Noise1D hills(static_cast<std::size_t>(length / 500) + 2, rng);
    const Noise1D ridge(static_cast<std::size_t>(length / 40) + 2, rng);
    std::vector<double> skyline(static_cast<std::size_t>(length));
    for (int x = 0; x < length; ++x) {
        skyline[x] = h * (0.12 + 0.45 * hills(x / 500.0)) + 14.0 * (ridge(x / 40.0) - 0.5);
    }
    // Trees and buildings poke up above the skyline.
    const int structures = length / 45;
    for (int s = 0; s < structures; ++s) {
        const double centre = u(rng) * length;
        const bool tree = u(rng) < 0.6;
        const double half_width = tree ? 5.0 + 15.0 * u(rng) : 10.0 + 20.0 * u(rng);
        const double rise = 6.0 + 28.0 * u(rng);
        const int x0 = std::max(0, static_cast<int>(centre - half_width));
        const int x1 = std::min(length - 1, static_cast<int>(centre + half_width));
        for (int x = x0; x <= x1; ++x) {
            const double lift = tree ? rise * (1.0 - std::abs(x - centre) / half_width) : rise;
            skyline[x] = std::min(skyline[x], h * 0.62 - lift);
        }
    }

    // Horizontal bands (hedges, fences, embankments) drift slowly along the
    // route and survive horizontal motion blur.
    const Noise2D bands(static_cast<std::size_t>(length / 150) + 2, static_cast<std::size_t>(height / 6) + 2, rng);
    const Noise2D coarse(static_cast<std::size_t>(length / 12) + 2, static_cast<std::size_t>(height / 12) + 2, rng);
    const Noise2D fine(static_cast<std::size_t>(length / 4) + 2, static_cast<std::size_t>(height / 4) + 2, rng);
    std::vector<double> poles(static_cast<std::size_t>(length), 0.0);
    for (int p = 0; p < length / 30; ++p) {
        const int x0 = static_cast<int>(u(rng) * length);
        const int w = 2 + static_cast<int>(4.0 * u(rng));
        const double shade = u(rng) < 0.5 ? 30.0 : 200.0;
        for (int x = x0; x < std::min(length, x0 + w); ++x) {
            poles[x] = shade;
        }
    }

    const double road = 0.75 * h;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < length; ++x) {
            double v;
            if (y < skyline[x]) {
                v = 225.0;
            } else if (y >= road) {
                v = 110.0;
            } else if (poles[x] > 0.0) {
                v = poles[x];
            } else {
                v = 20.0 + 110.0 * bands(x / 150.0, y / 6.0) + 60.0 * coarse(x / 12.0, y / 12.0) +
                    30.0 * fine(x / 4.0, y / 4.0);
            }
            values_[static_cast<std::size_t>(y) * length + x] = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }
    }
}

GrayImage Scene::render(double x, int width) const {
    if (x < 0.0 || x + width + 1 > length_) {
        throw InvalidInput("view leaves the scene");
    }
    GrayImage out(width, height_);
    const auto base = static_cast<int>(std::floor(x));
    const double f = x - base;
    for (int y = 0; y < height_; ++y) {
        for (int u = 0; u < width; ++u) {
            const double v = (1.0 - f) * at(base + u, y) + f * at(base + u + 1, y);
            out.at(u, y) = to_pixel(v);
        }
    }
    return out;
}

std::vector<double> uniform_positions(std::size_t count, double step, double start) {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = start + static_cast<double>(k) * step;
    }
    return out;
}

std::vector<double> jittered_positions(double start, double end, double base_step, double speed_min,
                                       double speed_max, std::mt19937_64& rng, double drift_scale) {
    std::uniform_real_distribution<double> initial(speed_min, speed_max);
    std::normal_distribution<double> drift(0.0, drift_scale * (speed_max - speed_min));
    std::vector<double> out;
    double position = start;
    double speed = initial(rng);
    while (position <= end) {
        out.push_back(position);
        speed += drift(rng);
        // Reflect at the bounds so the speed keeps wandering inside them.
        if (speed > speed_max) {
            speed = 2.0 * speed_max - speed;
        }
        if (speed < speed_min) {
            speed = 2.0 * speed_min - speed;
        }
        speed = std::clamp(speed, speed_min, speed_max);
        position += speed * base_step;
    }
    return out;
}

std::vector<GrayImage> render_traverse(const Scene& scene, const std::vector<double>& positions, int width) {
    std::vector<GrayImage> frames;
    frames.reserve(positions.size());
    for (double x : positions) {
        frames.push_back(scene.render(x, width));
    }
    return frames;
}

NightDistortion::NightDistortion(int width, int height, const NightParams& params, std::mt19937_64& rng)
    : width_(width), height_(height), params_(params) {
    const int cols = (width + params.region_size - 1) / params.region_size;
    const int rows = (height + params.region_size - 1) / params.region_size;
    std::uniform_real_distribution<double> gain(params.gain_min, params.gain_max);
    std::uniform_real_distribution<double> offset(params.offset_min, params.offset_max);
    for (int i = 0; i < cols * rows; ++i) {
        gains_.push_back(gain(rng));
        offsets_.push_back(offset(rng));
    }
}

GrayImage NightDistortion::apply(const GrayImage& day, std::mt19937_64& rng) const {
    if (day.width != width_ || day.height != height_) {
        throw InvalidInput("night distortion built for a different frame size");
    }
    std::normal_distribution<double> noise(0.0, params_.noise_sigma);
    const int cols = (width_ + params_.region_size - 1) / params_.region_size;
    const int headlight_start = static_cast<int>(std::floor(height_ * (1.0 - params_.headlight_fraction)));
    GrayImage out(width_, height_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const auto region = static_cast<std::size_t>((y / params_.region_size) * cols + x / params_.region_size);
            double v = gains_[region] * day.at(x, y) + offsets_[region];
            if (y >= headlight_start) {
                v = params_.headlight_level + 40.0;
            }
            out.at(x, y) = to_pixel(v + noise(rng));
        }
    }
    return out;
}

GrayImage add_noise(const GrayImage& img, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    GrayImage out = img;
    for (auto& p : out.pixels) {
        p = to_pixel(p + noise(rng));
    }
    return out;
}

GroundTruth truth_from_positions(const std::vector<double>& query_positions, double reference_step,
                                 std::size_t interval) {
    GroundTruth gt;
    if (interval == 0) {
        throw InvalidInput("anchor interval must be positive");
    }
    for (std::size_t q = 0; q < query_positions.size(); q += interval) {
        gt.anchors.push_back({static_cast<double>(q), query_positions[q] / reference_step});
    }
    const std::size_t last = query_positions.size() - 1;
    if (last % interval != 0) {
        gt.anchors.push_back({static_cast<double>(last), query_positions[last] / reference_step});
    }
    gt.validate();
    return gt;
}

double mean_spacing(const std::vector<double>& positions) {
    if (positions.size() < 2) {
        return 0.0;
    }
    return (positions.back() - positions.front()) / static_cast<double>(positions.size() - 1);
}

DayNightPair make_day_night_pair(const RouteParams& params) {
    const double end = static_cast<double>(params.reference_frames - 1) * params.reference_step;
    const Scene scene(static_cast<int>(end) + params.view_width + 8, params.view_height, params.seed);
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);

    const auto ref_positions = uniform_positions(params.reference_frames, params.reference_step);
    const auto query_positions =
        jittered_positions(0.0, end, params.reference_step, params.speed_min, params.speed_max, rng);

    DayNightPair pair;
    pair.reference = render_traverse(scene, ref_positions, params.view_width);
    const NightDistortion night(params.view_width, params.view_height, params.night, rng);
    for (double x : query_positions) {
        pair.query.push_back(night.apply(scene.render(x, params.view_width), rng));
    }
    pair.truth = truth_from_positions(query_positions, params.reference_step, params.anchor_interval);
    pair.truth.reference_spacing = params.reference_step;
    pair.truth.query_spacing = mean_spacing(query_positions);
    pair.v_av = *pair.truth.query_spacing / params.reference_step;
    return pair;
}

VideoRoute make_video_route(const RouteParams& params, double video_step_ratio, double route_fraction,
                            double noise_sigma) {
    const double end = static_cast<double>(params.reference_frames - 1) * params.reference_step;
    const Scene scene(static_cast<int>(end) + params.view_width + 8, params.view_height, params.seed);
    std::mt19937_64 rng(params.seed ^ 0x5851f42d4c957f2dULL);

    const auto ref_positions = uniform_positions(params.reference_frames, params.reference_step);
    const double video_step = params.reference_step * video_step_ratio;
    auto video_positions = jittered_positions(0.0, end * route_fraction, video_step, params.speed_min,
                                              params.speed_max, rng, 0.03 * std::sqrt(video_step_ratio));
    // Rescale so the mean spacing is exactly video_step.
    if (video_positions.size() > 1) {
        const double scale =
            video_step * static_cast<double>(video_positions.size() - 1) / video_positions.back();
        for (double& x : video_positions) {
            x *= scale;
        }
    }

    VideoRoute route;
    route.reference = render_traverse(scene, ref_positions, params.view_width);
    for (double x : video_positions) {
        route.video.push_back(add_noise(scene.render(x, params.view_width), noise_sigma, rng));
    }
    route.truth = truth_from_positions(video_positions, params.reference_step, params.anchor_interval);
    route.truth.reference_spacing = params.reference_step;
    route.truth.query_spacing = mean_spacing(video_positions);
    route.v_av = *route.truth.query_spacing / params.reference_step;
    return route;
}

} // namespace seqslam::synth
