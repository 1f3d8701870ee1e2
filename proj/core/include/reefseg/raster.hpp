#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reefseg {

/// Multi-band float32 grid with a per-pixel validity mask.
///
/// Samples are band-sequential and row-major inside each band, origin at the
/// top-left corner. `mask[p]` is non-zero when pixel `p` is valid; invalid
/// pixels conventionally hold NaN in every band.
struct Raster {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t bands = 0;
    std::vector<float> data;
    std::vector<std::uint8_t> mask;

    Raster() = default;
    /// Allocates a zero-filled raster with every pixel valid.
    Raster(std::uint32_t w, std::uint32_t h, std::uint32_t b);

    std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }

    bool valid(std::size_t pixel) const noexcept { return mask[pixel] != 0; }
    std::size_t valid_count() const noexcept;

    float& at(std::uint32_t band, std::size_t pixel) { return data[band * pixel_count() + pixel]; }
    float at(std::uint32_t band, std::size_t pixel) const { return data[band * pixel_count() + pixel]; }

    std::span<float> band(std::uint32_t b) { return {data.data() + b * pixel_count(), pixel_count()}; }
    std::span<const float> band(std::uint32_t b) const {
        return {data.data() + b * pixel_count(), pixel_count()};
    }

    /// Throws ContractError if any structural invariant is broken: zero
    /// dimensions, size mismatch, or a non-finite sample on a valid pixel.
    void validate() const;

    /// Marks `pixel` invalid and overwrites its samples with NaN.
    void invalidate(std::size_t pixel);

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// Bitwise equality: NaN payloads compare by bits, so save/load identity can
/// be asserted exactly.
bool bitwise_equal(const Raster& a, const Raster& b);

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// "#RRGGBB" formatting and parsing. Parsing throws ContractError on bad input.
std::string to_hex(Rgb color);
Rgb parse_hex_color(const std::string& text);

struct PaletteEntry {
    int label = 0;
    Rgb color;
    std::string name;
    bool background = false;
};

/// Ordered label → colour lookup used for rendering label maps.
class Palette {
public:
    Palette() = default;
    /// Throws ContractError on duplicate labels or more than one background entry.
    explicit Palette(std::vector<PaletteEntry> entries);

    const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
    const PaletteEntry* find(int label) const noexcept;
    /// Colour used for sentinel pixels: the background entry, else black.
    Rgb background() const noexcept;

private:
    std::vector<PaletteEntry> entries_;
};

/// Deterministic categorical palette: label id → distinct colour, stable
/// across runs. Used for previews before a legend exists.
Rgb categorical_color(int label);
Palette categorical_palette(std::span<const int> labels);

}  // namespace reefseg
