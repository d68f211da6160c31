#include "seqslam/config.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "seqslam/csv.hpp"
#include "seqslam/error.hpp"

namespace seqslam {

namespace {

constexpr std::array<std::string_view, 24> kKeys{
    "reference-dir", "query-dir",   "ground-truth",      "reference-crop", "query-crop",    "rx",
    "ry",            "patch-side",  "sequence-length",   "half-window",    "v-min",         "v-max",
    "v-step",        "v-av",        "threshold",         "fp-tolerance",   "reference-spacing",
    "query-spacing", "threads",     "online",            "histogram-bins", "exposures",     "source-fps",
    "blur-stride"};

std::string real_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double real_value(std::string_view key, std::string_view text) {
    try {
        const double v = parse_real(std::string(text));
        if (std::isnan(v)) {
            throw InvalidInput("nan");
        }
        return v;
    } catch (const InvalidInput&) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
    }
}

long long integer_value(std::string_view key, std::string_view text) {
    const std::string s(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + s + "'");
    }
    return v;
}

bool unset_word(std::string_view text) {
    return text == "auto" || text == "none" || text.empty();
}

std::optional<CropRect> crop_value(std::string_view key, std::string_view text) {
    if (unset_word(text)) {
        return std::nullopt;
    }
    const auto fields = split_csv(text);
    if (fields.size() != 4) {
        throw ConfigError("'" + std::string(key) + "' expects x0,y0,width,height");
    }
    CropRect r;
    r.x0 = static_cast<int>(integer_value(key, fields[0]));
    r.y0 = static_cast<int>(integer_value(key, fields[1]));
    r.width = static_cast<int>(integer_value(key, fields[2]));
    r.height = static_cast<int>(integer_value(key, fields[3]));
    return r;
}

std::string crop_text(const CropRect& r) {
    return std::to_string(r.x0) + "," + std::to_string(r.y0) + "," + std::to_string(r.width) + "," +
           std::to_string(r.height);
}

} // namespace

std::span<const std::string_view> config_keys() {
    return kKeys;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (rx <= 0 || ry <= 0 || patch_side <= 0) {
        fail("rx, ry and patch-side must be positive");
    }
    if (rx % patch_side != 0 || ry % patch_side != 0) {
        fail("rx and ry must be divisible by patch-side (" + std::to_string(rx) + "x" + std::to_string(ry) + ", " +
             std::to_string(patch_side) + ")");
    }
    if (sequence_length < 1) {
        fail("sequence-length must be at least 1");
    }
    if (half_window < 1) {
        fail("half-window must be at least 1");
    }
    try {
        slope.validate();
    } catch (const InvalidInput& e) {
        fail(e.what());
    }
    if (v_av && !(*v_av > 0.0 && std::isfinite(*v_av))) {
        fail("v-av must be positive");
    }
    if (!(fp_tolerance >= 0.0)) {
        fail("fp-tolerance must be non-negative");
    }
    if ((reference_spacing && !(*reference_spacing > 0.0)) || (query_spacing && !(*query_spacing > 0.0))) {
        fail("frame spacings must be positive");
    }
    if (histogram_bins < 1) {
        fail("histogram-bins must be at least 1");
    }
    for (double e : exposures) {
        if (!(e > 0.0)) {
            fail("exposures must be positive");
        }
    }
    if (!(source_fps > 0.0)) {
        fail("source-fps must be positive");
    }
    if (blur_stride < 1) {
        fail("blur-stride must be at least 1");
    }
}

double RunConfig::resolve_v_av(std::size_t reference_frames, std::size_t query_frames) const {
    if (v_av) {
        return *v_av;
    }
    if (reference_spacing && query_spacing) {
        return *query_spacing / *reference_spacing;
    }
    if (reference_frames == 0 || query_frames == 0) {
        return 1.0;
    }
    return static_cast<double>(reference_frames) / static_cast<double>(query_frames);
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    const std::string text = trim(value);
    auto optional_real = [&](std::optional<double>& field) {
        field = unset_word(text) ? std::nullopt : std::optional<double>(real_value(key, text));
    };
    if (key == "reference-dir") {
        cfg.reference_dir = text;
    } else if (key == "query-dir") {
        cfg.query_dir = text;
    } else if (key == "ground-truth") {
        cfg.ground_truth = text;
    } else if (key == "reference-crop") {
        cfg.reference_crop = crop_value(key, text);
    } else if (key == "query-crop") {
        cfg.query_crop = crop_value(key, text);
    } else if (key == "rx") {
        cfg.rx = static_cast<int>(integer_value(key, text));
    } else if (key == "ry") {
        cfg.ry = static_cast<int>(integer_value(key, text));
    } else if (key == "patch-side") {
        cfg.patch_side = static_cast<int>(integer_value(key, text));
    } else if (key == "sequence-length") {
        const auto n = integer_value(key, text);
        if (n < 1) {
            throw ConfigError("sequence-length must be at least 1");
        }
        cfg.sequence_length = static_cast<std::size_t>(n);
    } else if (key == "half-window") {
        cfg.half_window = static_cast<int>(integer_value(key, text));
    } else if (key == "v-min") {
        cfg.slope.v_min = real_value(key, text);
    } else if (key == "v-max") {
        cfg.slope.v_max = real_value(key, text);
    } else if (key == "v-step") {
        cfg.slope.v_step = real_value(key, text);
    } else if (key == "v-av") {
        optional_real(cfg.v_av);
    } else if (key == "threshold") {
        optional_real(cfg.threshold);
    } else if (key == "fp-tolerance") {
        cfg.fp_tolerance = real_value(key, text);
    } else if (key == "reference-spacing") {
        optional_real(cfg.reference_spacing);
    } else if (key == "query-spacing") {
        optional_real(cfg.query_spacing);
    } else if (key == "threads") {
        const auto t = integer_value(key, text);
        if (t < 0) {
            throw ConfigError("threads must be non-negative");
        }
        cfg.threads = static_cast<unsigned>(t);
    } else if (key == "online") {
        if (text == "true" || text == "1") {
            cfg.online = true;
        } else if (text == "false" || text == "0") {
            cfg.online = false;
        } else {
            throw ConfigError("'online' expects true or false");
        }
    } else if (key == "histogram-bins") {
        cfg.histogram_bins = static_cast<int>(integer_value(key, text));
    } else if (key == "exposures") {
        cfg.exposures.clear();
        if (!unset_word(text)) {
            for (const auto& f : split_csv(text)) {
                cfg.exposures.push_back(real_value(key, f));
            }
        }
    } else if (key == "source-fps") {
        cfg.source_fps = real_value(key, text);
    } else if (key == "blur-stride") {
        cfg.blur_stride = static_cast<int>(integer_value(key, text));
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string content = trim(std::string_view(line).substr(0, hash));
        if (content.empty()) {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            apply_setting(base, trim(std::string_view(content).substr(0, eq)), std::string_view(content).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(in, std::move(base));
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto line = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
    auto optional_line = [&](std::string_view key, const std::optional<double>& v) {
        line(key, v ? real_text(*v) : "auto");
    };
    line("reference-dir", cfg.reference_dir);
    line("query-dir", cfg.query_dir);
    line("ground-truth", cfg.ground_truth);
    line("reference-crop", cfg.reference_crop ? crop_text(*cfg.reference_crop) : "none");
    line("query-crop", cfg.query_crop ? crop_text(*cfg.query_crop) : "none");
    line("rx", std::to_string(cfg.rx));
    line("ry", std::to_string(cfg.ry));
    line("patch-side", std::to_string(cfg.patch_side));
    line("sequence-length", std::to_string(cfg.sequence_length));
    line("half-window", std::to_string(cfg.half_window));
    line("v-min", real_text(cfg.slope.v_min));
    line("v-max", real_text(cfg.slope.v_max));
    line("v-step", real_text(cfg.slope.v_step));
    optional_line("v-av", cfg.v_av);
    optional_line("threshold", cfg.threshold);
    line("fp-tolerance", real_text(cfg.fp_tolerance));
    optional_line("reference-spacing", cfg.reference_spacing);
    optional_line("query-spacing", cfg.query_spacing);
    line("threads", std::to_string(cfg.threads));
    line("online", cfg.online ? "true" : "false");
    line("histogram-bins", std::to_string(cfg.histogram_bins));
    std::string exposures;
    for (std::size_t i = 0; i < cfg.exposures.size(); ++i) {
        exposures += (i ? "," : "") + real_text(cfg.exposures[i]);
    }
    line("exposures", exposures.empty() ? "none" : exposures);
    line("source-fps", real_text(cfg.source_fps));
    line("blur-stride", std::to_string(cfg.blur_stride));
    return out.str();
}

} // namespace seqslam
