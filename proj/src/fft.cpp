#include "moist/fft.hpp"

#include <numbers>
#include <stdexcept>

namespace moist {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            // Twiddles computed directly rather than by recurrence to keep
            // rounding error at O(eps log n).
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            const Complex w(std::cos(angle), std::sin(angle));
            for (std::size_t start = 0; start < n; start += len) {
                const Complex u = a[start + k];
                const Complex t = w * a[start + k + half];
                a[start + k] = u + t;
                a[start + k + half] = u - t;
            }
        }
    }
}

void direct(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<Complex> twiddle(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            acc += a[t] * twiddle[(k * t) % n];
        out[k] = acc;
    }
    a.swap(out);
}

}  // namespace

void dft_inplace(std::vector<Complex>& data, bool inverse) {
    if (data.size() <= 1)
        return;
    if (is_power_of_two(data.size()))
        radix2(data, inverse);
    else
        direct(data, inverse);
}

void dft2d_inplace(std::vector<Complex>& grid, int width, int height, bool inverse) {
    if (width < 1 || height < 1 || grid.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("dft2d_inplace: grid size does not match width*height");
    std::vector<Complex> line(width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x)
            line[x] = grid[static_cast<std::size_t>(y) * width + x];
        dft_inplace(line, inverse);
        for (int x = 0; x < width; ++x)
            grid[static_cast<std::size_t>(y) * width + x] = line[x];
    }
    line.resize(height);
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y)
            line[y] = grid[static_cast<std::size_t>(y) * width + x];
        dft_inplace(line, inverse);
        for (int y = 0; y < height; ++y)
            grid[static_cast<std::size_t>(y) * width + x] = line[y];
    }
}

}  // namespace moist
