#pragma once

#include <complex>
#include <vector>

namespace moist {

using Complex = std::complex<double>;

/// In-place 1-D DFT, forward sign e^{-2πi kn/N}. Radix-2 when N is a power of
/// two, direct summation otherwise. The inverse is unnormalized.
void dft_inplace(std::vector<Complex>& data, bool inverse = false);

/// Separable 2-D DFT of a row-major width x height grid. Element (x, y) lives
/// at index y*width + x and transforms to F(u, v) at index v*width + u.
void dft2d_inplace(std::vector<Complex>& grid, int width, int height, bool inverse = false);

}  // namespace moist
