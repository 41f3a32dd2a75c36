#include "trapan/pfs.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "trapan/errors.hpp"

namespace trapan {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'S', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 32;

void put_u32(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
    p[2] = static_cast<unsigned char>(v >> 16);
    p[3] = static_cast<unsigned char>(v >> 24);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u64(unsigned char* p, std::uint64_t v) {
    put_u32(p, static_cast<std::uint32_t>(v));
    put_u32(p + 4, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t get_u64(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32(p)) |
           (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

void write_container(const RasterImage& img, const std::filesystem::path& path,
                     std::uint32_t dtype) {
    img.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    unsigned char header[kHeaderSize] = {};
    std::memcpy(header, kMagic, 4);
    put_u32(header + 4, kVersion);
    put_u32(header + 8, static_cast<std::uint32_t>(img.height));
    put_u32(header + 12, static_cast<std::uint32_t>(img.width));
    put_u32(header + 16, static_cast<std::uint32_t>(img.bands));
    put_u32(header + 20, dtype);
    put_u64(header + 24, 0);
    out.write(reinterpret_cast<const char*>(header), kHeaderSize);

    if (dtype == 0) {
        std::vector<unsigned char> payload(img.size() * 4);
        for (std::size_t i = 0; i < img.size(); ++i) {
            const float f = static_cast<float>(img.data[i]);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(payload.data() + i * 4, bits);
        }
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
    } else {
        std::vector<unsigned char> payload(img.size() * 8);
        for (std::size_t i = 0; i < img.size(); ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &img.data[i], 8);
            put_u64(payload.data() + i * 8, bits);
        }
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void save_pfs(const RasterImage& img, const std::filesystem::path& path) {
    write_container(img, path, 0);
}

void save_pfs_f64(const RasterImage& img, const std::filesystem::path& path) {
    write_container(img, path, 1);
}

RasterImage load_pfs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    unsigned char header[kHeaderSize];
    in.read(reinterpret_cast<char*>(header), kHeaderSize);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderSize))
        throw FormatError("file shorter than PFS header: " + path.string());
    if (std::memcmp(header, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string());
    if (get_u32(header + 4) != kVersion)
        throw FormatError("unsupported PFS version in " + path.string());
    const std::uint32_t h = get_u32(header + 8);
    const std::uint32_t w = get_u32(header + 12);
    const std::uint32_t c = get_u32(header + 16);
    const std::uint32_t dtype = get_u32(header + 20);
    if (dtype != 0 && dtype != 1)
        throw FormatError("unsupported PFS dtype in " + path.string());
    if (get_u64(header + 24) != 0)
        throw FormatError("nonzero reserved field in " + path.string());

    if (h == 0 || w == 0 || c == 0)
        throw CorruptError("zero dimension in header of " + path.string());

    const std::size_t count = static_cast<std::size_t>(h) * w * c;
    const std::size_t sample_bytes = dtype == 0 ? 4 : 8;
    std::vector<unsigned char> payload(count * sample_bytes);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size()))
        throw CorruptError("payload shorter than header dims in " + path.string());
    if (in.peek() != std::ifstream::traits_type::eof())
        throw CorruptError("trailing bytes after payload in " + path.string());

    RasterImage img(h, w, c);
    for (std::size_t i = 0; i < count; ++i) {
        double v;
        if (dtype == 0) {
            const std::uint32_t bits = get_u32(payload.data() + i * 4);
            float f;
            std::memcpy(&f, &bits, 4);
            v = static_cast<double>(f);
        } else {
            const std::uint64_t bits = get_u64(payload.data() + i * 8);
            std::memcpy(&v, &bits, 8);
        }
        if (!std::isfinite(v))
            throw CorruptError("non-finite sample in " + path.string());
        img.data[i] = v;
    }
    return img;
}

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
    std::filesystem::path p = raster_path;
    p.replace_extension(".json");
    return p;
}

void save_sidecar(const Sidecar& sc, const std::filesystem::path& raster_path) {
    nlohmann::json j;
    j["ratio"] = sc.ratio;
    j["nyquist_gains"] = sc.nyquist_gains;
    if (sc.bit_depth)
        j["bit_depth"] = *sc.bit_depth;
    else
        j["bit_depth"] = nullptr;
    j["sensor_label"] = sc.sensor_label;

    const auto path = sidecar_path(raster_path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

std::optional<Sidecar> load_sidecar(const std::filesystem::path& raster_path) {
    const auto path = sidecar_path(raster_path);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar " + path.string() + ": " + e.what());
    }
    Sidecar sc;
    try {
        if (j.contains("ratio")) sc.ratio = j.at("ratio").get<int>();
        if (j.contains("nyquist_gains"))
            sc.nyquist_gains = j.at("nyquist_gains").get<std::vector<double>>();
        if (j.contains("bit_depth") && !j.at("bit_depth").is_null())
            sc.bit_depth = j.at("bit_depth").get<int>();
        if (j.contains("sensor_label"))
            sc.sensor_label = j.at("sensor_label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad sidecar " + path.string() + ": " + e.what());
    }
    return sc;
}

}  // namespace trapan
