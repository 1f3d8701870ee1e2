#include "reefseg/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "reefseg/error.hpp"

namespace reefseg {
namespace {

static_assert(std::endian::native == std::endian::little, "BND1 codec assumes a little-endian host");

constexpr std::array<char, 4> kBndMagic{'B', 'N', 'D', '1'};
constexpr std::size_t kBndHeader = 16;

std::uint32_t read_u32(const std::uint8_t* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct PngReadSource {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->offset + length > src->bytes.size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, src->bytes.data() + src->offset, length);
    src->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_error_to_exception(png_structp png, png_const_charp message) {
    auto* error = static_cast<std::string*>(png_get_error_ptr(png));
    *error = message ? message : "libpng error";
    png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

bool has_png_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// libpng unwinds through longjmp, so everything touched after setjmp lives in
// this frame as plain data and is converted to a Raster by the caller.
struct DecodedPng {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
};

bool decode_png_pixels(std::span<const std::uint8_t> bytes, DecodedPng& out, std::string& error) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_exception, png_warning_ignore);
    if (!png) {
        error = "cannot allocate PNG reader";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        error = "cannot allocate PNG info";
        return false;
    }
    PngReadSource source{bytes, 0};
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &source, png_read_from_span);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        error = "unsupported PNG bit depth " + std::to_string(bit_depth) + " (only 8-bit is accepted)";
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY: out.channels = 1; break;
        case PNG_COLOR_TYPE_RGB: out.channels = 3; break;
        case PNG_COLOR_TYPE_RGB_ALPHA: out.channels = 4; break;
        default:
            error = "unsupported PNG colour type " + std::to_string(color_type) +
                    " (expected grey, RGB, or RGBA)";
            png_destroy_read_struct(&png, &info, nullptr);
            return false;
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
    png_read_update_info(png, info);

    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.pixels.assign(stride * out.height, 0);
    rows.resize(out.height);
    for (std::uint32_t y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

bool encode_png_pixels(std::uint32_t width, std::uint32_t height, int channels,
                       const std::vector<std::uint8_t>& pixels, std::vector<std::uint8_t>& out,
                       std::string& error) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_exception, png_warning_ignore);
    if (!png) {
        error = "cannot allocate PNG writer";
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        error = "cannot allocate PNG info";
        return false;
    }
    std::vector<png_const_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGB_ALPHA;
    png_set_IHDR(png, info, width, height, 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    const std::size_t stride = std::size_t{width} * static_cast<std::size_t>(channels);
    for (std::uint32_t y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    thread_local std::mt19937_64 suffix_rng{std::random_device{}()};
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(suffix_rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("error while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
    if (!has_png_signature(bytes)) throw FormatError("not a PNG stream");
    DecodedPng decoded;
    std::string error;
    if (!decode_png_pixels(bytes, decoded, error)) throw FormatError("PNG: " + error);

    const std::uint32_t bands = decoded.channels == 1 ? 1 : 3;
    Raster raster(decoded.width, decoded.height, bands);
    const std::size_t n = raster.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint8_t* px = decoded.pixels.data() + p * static_cast<std::size_t>(decoded.channels);
        if (decoded.channels == 4 && px[3] == 0) {
            raster.invalidate(p);
            continue;
        }
        for (std::uint32_t b = 0; b < bands; ++b) raster.at(b, p) = static_cast<float>(px[b]) / 255.0f;
    }
    return raster;
}

Raster load_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

std::vector<std::uint8_t> encode_png(const Raster& raster) {
    raster.validate();
    if (raster.bands != 1 && raster.bands != 3) {
        throw ContractError("PNG output needs 1 or 3 bands, got " + std::to_string(raster.bands));
    }
    const std::size_t n = raster.pixel_count();
    // Colour rasters with gaps keep their mask as a zero alpha channel.
    const int channels = raster.bands == 3 && raster.valid_count() < n ? 4 : static_cast<int>(raster.bands);
    std::vector<std::uint8_t> pixels(n * channels, 0);
    for (std::size_t p = 0; p < n; ++p) {
        if (!raster.valid(p)) continue;
        for (std::uint32_t b = 0; b < raster.bands; ++b) {
            const float v = std::clamp(raster.at(b, p), 0.0f, 1.0f);
            pixels[p * channels + b] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
        if (channels == 4) pixels[p * channels + 3] = 255;
    }
    std::vector<std::uint8_t> out;
    std::string error;
    if (!encode_png_pixels(raster.width, raster.height, channels, pixels, out, error)) {
        throw FormatError("PNG encode: " + error);
    }
    return out;
}

void save_png(const Raster& raster, const std::filesystem::path& path) { write_file_atomic(path, encode_png(raster)); }

Raster decode_bnd(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kBndMagic.begin(), kBndMagic.end(), bytes.begin())) {
        throw FormatError("BND: bad magic (expected \"BND1\")");
    }
    if (bytes.size() < kBndHeader) throw FormatError("BND: truncated header");
    const std::uint32_t width = read_u32(bytes.data() + 4);
    const std::uint32_t height = read_u32(bytes.data() + 8);
    const std::uint32_t bands = read_u32(bytes.data() + 12);
    if (width == 0 || height == 0 || bands == 0) {
        throw FormatError("BND: zero dimension in header (" + std::to_string(width) + "x" + std::to_string(height) +
                          "x" + std::to_string(bands) + ")");
    }
    const std::uint64_t samples = std::uint64_t{width} * height * bands;
    if (samples > (std::uint64_t{1} << 31)) throw FormatError("BND: more than 2^31 samples");
    if (bytes.size() - kBndHeader < samples * sizeof(float)) throw FormatError("BND: truncated payload");
    if (bytes.size() - kBndHeader > samples * sizeof(float)) throw FormatError("BND: trailing bytes after payload");

    Raster raster;
    raster.width = width;
    raster.height = height;
    raster.bands = bands;
    raster.data.resize(samples);
    std::memcpy(raster.data.data(), bytes.data() + kBndHeader, samples * sizeof(float));
    raster.mask.assign(raster.pixel_count(), 1);
    for (std::uint32_t b = 0; b < bands; ++b) {
        auto values = raster.band(b);
        for (std::size_t p = 0; p < values.size(); ++p) {
            if (std::isnan(values[p])) raster.mask[p] = 0;
        }
    }
    return raster;
}

Raster load_bnd(const std::filesystem::path& path) { return decode_bnd(read_file(path)); }

std::vector<std::uint8_t> encode_bnd(const Raster& raster) {
    raster.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kBndHeader + raster.data.size() * sizeof(float));
    out.insert(out.end(), kBndMagic.begin(), kBndMagic.end());
    append_u32(out, raster.width);
    append_u32(out, raster.height);
    append_u32(out, raster.bands);
    const std::size_t n = raster.pixel_count();
    const float nan = std::numeric_limits<float>::quiet_NaN();
    for (std::uint32_t b = 0; b < raster.bands; ++b) {
        for (std::size_t p = 0; p < n; ++p) {
            const float v = raster.valid(p) ? raster.at(b, p) : (std::isnan(raster.at(b, p)) ? raster.at(b, p) : nan);
            const auto bits = std::bit_cast<std::uint32_t>(v);
            append_u32(out, bits);
        }
    }
    return out;
}

void save_bnd(const Raster& raster, const std::filesystem::path& path) { write_file_atomic(path, encode_bnd(raster)); }

Raster decode_raster(std::span<const std::uint8_t> bytes) {
    if (has_png_signature(bytes)) return decode_png(bytes);
    return decode_bnd(bytes);
}

Raster load_raster(const std::filesystem::path& path) { return decode_raster(read_file(path)); }

Raster labels_to_raster(const LabelMap& labels) {
    Raster raster(labels.width, labels.height, 1);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        if (labels.labels[p] == kInvalid) {
            raster.invalidate(p);
        } else {
            raster.data[p] = static_cast<float>(labels.labels[p]);
        }
    }
    return raster;
}

LabelMap raster_to_labels(const Raster& raster) {
    if (raster.bands != 1) throw FormatError("label raster must have exactly one band");
    LabelMap labels(raster.width, raster.height, kInvalid);
    for (std::size_t p = 0; p < raster.pixel_count(); ++p) {
        if (!raster.valid(p)) continue;
        const float v = raster.data[p];
        if (v != std::floor(v) || v < static_cast<float>(kNoise) || v > 1e7f) {
            throw FormatError("label raster holds non-label value at pixel " + std::to_string(p));
        }
        labels.labels[p] = static_cast<int>(v);
    }
    return labels;
}

}  // namespace reefseg
