#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace moist {

/// Raised when a file cannot be opened, read, or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a file is readable but its contents are not in a supported format.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit grayscale image, row-major. Width and height are both at least 2.
class GrayImage {
public:
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);
    GrayImage(int width, int height, std::uint8_t fill);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t at(int x, int y) const noexcept { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) noexcept { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

    bool operator==(const GrayImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Image whose values are gray-level indices in [0, levels).
///
/// Unlike GrayImage this allows degenerate shapes such as a single row, which
/// is convenient for run-length tests.
class QuantizedImage {
public:
    QuantizedImage(int width, int height, int levels, std::vector<int> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int levels() const noexcept { return levels_; }

    int at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    const std::vector<int>& values() const noexcept { return values_; }

private:
    int width_;
    int height_;
    int levels_;
    std::vector<int> values_;
};

/// Rec.601 luma, rounded half-up.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Reads an 8-bit gray, gray+alpha, RGB or RGBA PNG. Alpha is ignored.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit single-channel PNG.
void save_png(const GrayImage& img, const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. `rgb` holds width*height*3 interleaved bytes.
void save_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb,
                  const std::filesystem::path& path);

/// Uniform-width buckets: value = floor(intensity * levels / 256).
QuantizedImage quantize(const GrayImage& img, int levels);

}  // namespace moist
