#include "reefseg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "reefseg/error.hpp"
#include "reefseg/label_map.hpp"

namespace reefseg {

Raster::Raster(std::uint32_t w, std::uint32_t h, std::uint32_t b)
    : width(w), height(h), bands(b), data(std::size_t{w} * h * b, 0.0f), mask(std::size_t{w} * h, 1) {}

std::size_t Raster::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto v) { return v != 0; }));
}

void Raster::validate() const {
    if (width == 0 || height == 0 || bands == 0) {
        throw ContractError("raster has a zero dimension (" + std::to_string(width) + "x" +
                            std::to_string(height) + "x" + std::to_string(bands) + ")");
    }
    if (data.size() != pixel_count() * bands) throw ContractError("raster data length does not match dimensions");
    if (mask.size() != pixel_count()) throw ContractError("raster mask length does not match dimensions");
    for (std::uint32_t b = 0; b < bands; ++b) {
        auto values = band(b);
        for (std::size_t p = 0; p < values.size(); ++p) {
            if (mask[p] && !std::isfinite(values[p])) {
                throw ContractError("non-finite sample on valid pixel " + std::to_string(p) + " band " +
                                    std::to_string(b));
            }
        }
    }
}

void Raster::invalidate(std::size_t pixel) {
    mask[pixel] = 0;
    for (std::uint32_t b = 0; b < bands; ++b) at(b, pixel) = std::numeric_limits<float>::quiet_NaN();
}

bool bitwise_equal(const Raster& a, const Raster& b) {
    return a.width == b.width && a.height == b.height && a.bands == b.bands && a.mask == b.mask &&
           a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

std::vector<int> LabelMap::distinct_labels() const {
    std::set<int> seen;
    for (int v : labels) {
        if (!is_sentinel(v)) seen.insert(v);
    }
    return {seen.begin(), seen.end()};
}

std::string to_hex(Rgb color) {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out = "#";
    for (std::uint8_t c : {color.r, color.g, color.b}) {
        out += digits[c >> 4];
        out += digits[c & 0x0F];
    }
    return out;
}

Rgb parse_hex_color(const std::string& text) {
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ContractError("invalid colour '" + text + "', expected #RRGGBB");
    };
    if (text.size() != 7 || text[0] != '#') throw ContractError("invalid colour '" + text + "', expected #RRGGBB");
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(text[i]) * 16 + nibble(text[i + 1])); };
    return {byte(1), byte(3), byte(5)};
}

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
    std::set<int> labels;
    int backgrounds = 0;
    for (const auto& e : entries_) {
        if (!labels.insert(e.label).second) {
            throw ContractError("palette has duplicate label " + std::to_string(e.label));
        }
        if (e.background) ++backgrounds;
    }
    if (backgrounds > 1) throw ContractError("palette has more than one background entry");
}

const PaletteEntry* Palette::find(int label) const noexcept {
    for (const auto& e : entries_) {
        if (e.label == label && !e.background) return &e;
    }
    return nullptr;
}

Rgb Palette::background() const noexcept {
    for (const auto& e : entries_) {
        if (e.background) return e.color;
    }
    return {0, 0, 0};
}

Rgb categorical_color(int label) {
    // Tableau-style 20 colour cycle; black is reserved for sentinels.
    static constexpr std::array<Rgb, 20> kCycle{{
        {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},   {148, 103, 189},
        {140, 86, 75},   {227, 119, 194}, {127, 127, 127}, {188, 189, 34},  {23, 190, 207},
        {174, 199, 232}, {255, 187, 120}, {152, 223, 138}, {255, 152, 150}, {197, 176, 213},
        {196, 156, 148}, {247, 182, 210}, {199, 199, 199}, {219, 219, 141}, {158, 218, 229},
    }};
    if (label < 0) return {0, 0, 0};
    return kCycle[static_cast<std::size_t>(label) % kCycle.size()];
}

Palette categorical_palette(std::span<const int> labels) {
    std::vector<PaletteEntry> entries;
    entries.reserve(labels.size());
    for (int label : labels) {
        entries.push_back({label, categorical_color(label), "cluster " + std::to_string(label), false});
    }
    return Palette(std::move(entries));
}

}  // namespace reefseg
