#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "reefseg/label_map.hpp"
#include "reefseg/raster.hpp"

namespace reefseg {

/// Reads an 8-bit grayscale, RGB, or RGBA PNG. Samples are scaled by 1/255.
/// Grey yields one band; RGB and RGBA yield three, with alpha = 0 pixels
/// marked invalid (their samples become NaN). Palette, grey+alpha, and
/// 16-bit images raise FormatError.
Raster load_png(const std::filesystem::path& path);
Raster decode_png(std::span<const std::uint8_t> bytes);

/// Writes a 1- or 3-band raster with samples in [0,1] as an 8-bit PNG
/// (round(255·v), clamped). Invalid pixels are written as zeros; a 3-band
/// raster with invalid pixels gets an alpha channel that is 0 exactly there.
void save_png(const Raster& raster, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Raster& raster);

/// BND1 container:
///   bytes 0..3   "BND1"
///   bytes 4..15  u32 LE width, height, bands
///   then width·height·bands float32 LE, band-sequential, row-major.
/// NaN marks an invalid pixel; a pixel is invalid if any of its bands is NaN.
Raster load_bnd(const std::filesystem::path& path);
Raster decode_bnd(std::span<const std::uint8_t> bytes);

void save_bnd(const Raster& raster, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_bnd(const Raster& raster);

/// Loads either format, dispatching on the file signature.
Raster load_raster(const std::filesystem::path& path);
Raster decode_raster(std::span<const std::uint8_t> bytes);

/// One-band raster carrying label ids as floats; kInvalid pixels are masked.
Raster labels_to_raster(const LabelMap& labels);
/// Inverse of labels_to_raster. Throws FormatError unless the raster has one
/// band of integral values.
LabelMap raster_to_labels(const Raster& raster);

/// Writes `bytes` to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace reefseg
