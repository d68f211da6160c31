#include "seqslam/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "seqslam/error.hpp"
#include "seqslam/imaging.hpp"

namespace seqslam {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

bool is_image_extension(const std::string& ext) {
    return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

RawImage read_png(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    RawImage out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.channels = color ? 3 : 1;
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
        const std::string message = image.message;
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + message);
    }
    return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string netpbm_token(std::istream& in) {
    std::string token;
    while (in) {
        const int c = in.get();
        if (c == EOF) {
            break;
        }
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

RawImage read_netpbm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const std::string magic = netpbm_token(in);
    if (magic != "P5" && magic != "P6") {
        throw IoError(path.string() + ": only binary PGM (P5) and PPM (P6) are supported");
    }
    RawImage out;
    try {
        out.width = std::stoi(netpbm_token(in));
        out.height = std::stoi(netpbm_token(in));
        const int maxval = std::stoi(netpbm_token(in));
        if (maxval <= 0 || maxval > 255) {
            throw IoError(path.string() + ": only 8-bit netpbm files are supported");
        }
    } catch (const std::logic_error&) {
        throw IoError(path.string() + ": malformed netpbm header");
    }
    if (out.width <= 0 || out.height <= 0) {
        throw IoError(path.string() + ": invalid dimensions");
    }
    out.channels = magic == "P5" ? 1 : 3;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
    in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(out.pixels.size())) {
        throw IoError(path.string() + ": truncated pixel data");
    }
    return out;
}

} // namespace

RawImage read_image(const fs::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        return read_png(path);
    }
    if (ext == ".pgm" || ext == ".ppm") {
        return read_netpbm(path);
    }
    throw IoError("unsupported image format: " + path.string());
}

void write_image(const fs::path& path, const GrayImage& img) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        png_image image{};
        image.version = PNG_IMAGE_VERSION;
        image.width = static_cast<png_uint_32>(img.width);
        image.height = static_cast<png_uint_32>(img.height);
        image.format = PNG_FORMAT_GRAY;
        if (png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr) == 0) {
            throw IoError("cannot write PNG " + path.string() + ": " + image.message);
        }
        return;
    }
    if (ext == ".pgm") {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
        return;
    }
    throw IoError("unsupported output format: " + path.string());
}

std::vector<fs::path> list_frames(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<std::pair<unsigned long long, fs::path>> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || !is_image_extension(lower_extension(entry.path()))) {
            continue;
        }
        const std::string stem = entry.path().stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
            throw IoError("frame filename stem is not numeric: " + entry.path().string());
        }
        frames.emplace_back(std::stoull(stem), entry.path());
    }
    std::sort(frames.begin(), frames.end());
    std::vector<fs::path> out;
    out.reserve(frames.size());
    for (auto& [number, path] : frames) {
        out.push_back(std::move(path));
    }
    return out;
}

std::vector<GrayImage> load_gray_frames(const fs::path& dir) {
    std::vector<GrayImage> frames;
    for (const auto& path : list_frames(dir)) {
        frames.push_back(to_grayscale(read_image(path)));
    }
    return frames;
}

} // namespace seqslam
