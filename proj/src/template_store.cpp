#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "seqslam/error.hpp"
#include "seqslam/matching.hpp"

namespace seqslam {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'Q', 'S', 'M'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                    static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) {
        throw IoError("template store truncated in header");
    }
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

} // namespace

void write_store(std::ostream& out, const TemplateStore& store) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kStoreFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(store.rx()));
    put_u32(out, static_cast<std::uint32_t>(store.ry()));
    put_u32(out, static_cast<std::uint32_t>(store.patch_side()));
    put_u32(out, static_cast<std::uint32_t>(store.size()));
    for (std::size_t k = 0; k < store.size(); ++k) {
        for (float v : store.values(k)) {
            put_u32(out, std::bit_cast<std::uint32_t>(v));
        }
    }
    if (!out) {
        throw IoError("failed writing template store");
    }
}

TemplateStore read_store(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw IoError("not a template store (bad magic)");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kStoreFormatVersion) {
        throw IoError("unsupported template store version " + std::to_string(version));
    }
    const auto rx = get_u32(in);
    const auto ry = get_u32(in);
    const auto patch = get_u32(in);
    const auto count = get_u32(in);
    if (rx == 0 || ry == 0 || patch == 0 || rx > (1u << 16) || ry > (1u << 16) || patch > rx) {
        throw IoError("template store header has invalid geometry");
    }

    if (rx % patch != 0 || ry % patch != 0) {
        throw IoError("template store header has invalid geometry");
    }
    TemplateStore store(static_cast<int>(rx), static_cast<int>(ry), static_cast<int>(patch));
    const std::size_t stride = static_cast<std::size_t>(rx) * ry;
    std::vector<unsigned char> raw(stride * 4);
    store.data_.reserve(stride * count);
    for (std::uint32_t k = 0; k < count; ++k) {
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
            throw IoError("template store truncated at template " + std::to_string(k));
        }
        for (std::size_t i = 0; i < stride; ++i) {
            const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                                       (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                                       (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                                       (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
            store.data_.push_back(std::bit_cast<float>(bits));
        }
    }
    store.count_ = count;
    return store;
}

void save_store(const std::filesystem::path& path, const TemplateStore& store) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_store(out, store);
}

TemplateStore load_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_store(in);
}

} // namespace seqslam
