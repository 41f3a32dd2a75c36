#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trapan/raster.hpp"

namespace trapan {

// PFS container: 32-byte header then planar samples, little-endian.
//   bytes 0-3   magic "PFS1"
//   u32         version = 1
//   u32         height
//   u32         width
//   u32         bands
//   u32         dtype    0 = f32, 1 = f64 (f64 used only for checkpoints)
//   u64         reserved = 0
// Image files always carry dtype 0; the f64 variant exists so network
// checkpoints can round-trip parameters exactly.

/// Writes `img` as a dtype-0 (f32) container. Deterministic bytes for
/// identical input. Throws IoError on I/O failure.
void save_pfs(const RasterImage& img, const std::filesystem::path& path);

/// Loads a PFS container. Throws FormatError on bad magic/version/dtype,
/// CorruptError when the payload does not match the header or contains
/// non-finite samples, IoError when the file cannot be read.
RasterImage load_pfs(const std::filesystem::path& path);

/// f64 variant used by checkpoint files.
void save_pfs_f64(const RasterImage& img, const std::filesystem::path& path);

/// Optional JSON sidecar carrying acquisition metadata next to a raster.
/// Lives at the raster path with its extension replaced by ".json".
struct Sidecar {
    int ratio = 4;
    std::vector<double> nyquist_gains;
    std::optional<int> bit_depth;
    std::string sensor_label;
};

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);
void save_sidecar(const Sidecar& sc, const std::filesystem::path& raster_path);
std::optional<Sidecar> load_sidecar(const std::filesystem::path& raster_path);

}  // namespace trapan
