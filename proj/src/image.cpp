#include "moist/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace moist {

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 2 || height < 2)
        throw std::invalid_argument("GrayImage: width and height must be at least 2");
    if (pixels_.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("GrayImage: pixel count does not match width*height");
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : GrayImage(width, height, std::vector<std::uint8_t>(
                                   static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

QuantizedImage::QuantizedImage(int width, int height, int levels, std::vector<int> values)
    : width_(width), height_(height), levels_(levels), values_(std::move(values)) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("QuantizedImage: empty shape");
    if (levels < 2)
        throw std::invalid_argument("QuantizedImage: levels must be at least 2");
    if (values_.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("QuantizedImage: value count does not match width*height");
    for (int v : values_)
        if (v < 0 || v >= levels)
            throw std::invalid_argument("QuantizedImage: value outside [0, levels)");
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    // Integer form of 0.299R + 0.587G + 0.114B, so half-up rounding is exact.
    const unsigned weighted = 299u * r + 587u * g + 114u * b;
    return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr fp(std::fopen(path.c_str(), mode));
    if (!fp)
        throw IoError("cannot open " + path.string());
    return fp;
}

// libpng reports errors by longjmp; nothing with a destructor may be
// constructed between setjmp and the libpng calls it protects.
struct PngErrorSink {
    char message[256] = {0};
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof sink->message, "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Returns false and fills `sink` on a libpng error.
bool write_png_rows(std::FILE* fp, int width, int height, int color_type, int channels,
                    const std::uint8_t* data, PngErrorSink* sink) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler,
                                              png_warning_handler);
    if (!png)
        return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // No timestamps or text chunks: output bytes depend only on the pixels.
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

void write_png(int width, int height, int color_type, int channels, const std::uint8_t* data,
               const std::filesystem::path& path) {
    FilePtr fp = open_file(path, "wb");
    PngErrorSink sink;
    if (!write_png_rows(fp.get(), width, height, color_type, channels, data, &sink))
        throw IoError("cannot write " + path.string() + ": " + sink.message);
    if (std::fflush(fp.get()) != 0)
        throw IoError("cannot write " + path.string());
}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
};

enum class ReadStatus { Ok, PngError, BadDepth, BadColor };

ReadStatus read_png_rows(std::FILE* fp, DecodedPng* out, PngErrorSink* sink) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler,
                                             png_warning_handler);
    if (!png)
        return ReadStatus::PngError;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return ReadStatus::PngError;
    }
    png_init_io(png, fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    out->bit_depth = png_get_bit_depth(png, info);
    out->color_type = png_get_color_type(png, info);
    if (out->bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        return ReadStatus::BadDepth;
    }
    switch (out->color_type) {
        case PNG_COLOR_TYPE_GRAY: out->channels = 1; break;
        case PNG_COLOR_TYPE_GRAY_ALPHA: out->channels = 2; break;
        case PNG_COLOR_TYPE_RGB: out->channels = 3; break;
        case PNG_COLOR_TYPE_RGB_ALPHA: out->channels = 4; break;
        default:
            png_destroy_read_struct(&png, &info, nullptr);
            return ReadStatus::BadColor;
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE)
        png_set_interlace_handling(png);
    png_read_update_info(png, info);

    out->width = static_cast<int>(png_get_image_width(png, info));
    out->height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);
    out->raw.resize(stride * out->height);
    out->rows.resize(out->height);
    for (int y = 0; y < out->height; ++y)
        out->rows[y] = out->raw.data() + y * stride;
    png_read_image(png, out->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return ReadStatus::Ok;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    FilePtr fp = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError("not a PNG file: " + path.string());

    auto decoded = std::make_unique<DecodedPng>();
    PngErrorSink sink;
    switch (read_png_rows(fp.get(), decoded.get(), &sink)) {
        case ReadStatus::Ok: break;
        case ReadStatus::PngError:
            throw FormatError("cannot decode " + path.string() + ": " + sink.message);
        case ReadStatus::BadDepth:
            throw FormatError("unsupported bit depth " + std::to_string(decoded->bit_depth) + " in " +
                              path.string());
        case ReadStatus::BadColor:
            throw FormatError("unsupported color type in " + path.string());
    }

    const int width = decoded->width;
    const int height = decoded->height;
    const int channels = decoded->channels;
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const std::uint8_t* row = decoded->rows[y];
        for (int x = 0; x < width; ++x) {
            const std::uint8_t* px = row + x * channels;
            gray[static_cast<std::size_t>(y) * width + x] = channels >= 3 ? luma(px[0], px[1], px[2]) : px[0];
        }
    }
    try {
        return GrayImage(width, height, std::move(gray));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string(e.what()) + " in " + path.string());
    }
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    write_png(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 1, img.pixels().data(), path);
}

void save_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb,
                  const std::filesystem::path& path) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("save_rgb_png: buffer size mismatch");
    write_png(width, height, PNG_COLOR_TYPE_RGB, 3, rgb.data(), path);
}

QuantizedImage quantize(const GrayImage& img, int levels) {
    if (levels < 2 || levels > 256)
        throw std::invalid_argument("quantize: levels must be in [2, 256]");
    std::vector<int> values(img.size());
    const auto& px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        values[i] = px[i] * levels / 256;
    return QuantizedImage(img.width(), img.height(), levels, std::move(values));
}

}  // namespace moist
