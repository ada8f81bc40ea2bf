#include <algorithm>
#include <cmath>
#include <numbers>

#include "moist/features.hpp"
#include "moist/fft.hpp"

namespace moist {

PowerSpectrum power_spectrum(const GrayImage& img, bool keep_dc) {
    const int w = img.width(), h = img.height();
    std::vector<Complex> grid(img.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = Complex(img.pixels()[i], 0.0);
    dft2d_inplace(grid, w, h);

    PowerSpectrum out{w, h, std::vector<double>(grid.size(), 0.0)};
    const int cx = w / 2, cy = h / 2;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const Complex f = grid[static_cast<std::size_t>(v) * w + u];
            const int su = (u + cx) % w, sv = (v + cy) % h;
            out.power[static_cast<std::size_t>(sv) * w + su] = f.real() * f.real() + f.imag() * f.imag();
        }
    }
    if (!keep_dc)
        out.power[static_cast<std::size_t>(cy) * w + cx] = 0.0;
    return out;
}

FeatureVector fps_features(const GrayImage& img) {
    const PowerSpectrum ps = power_spectrum(img);
    const int w = ps.width, h = ps.height;
    const int cx = w / 2, cy = h / 2;
    const double nyquist_corner = std::sqrt(0.5);
    const double sector = std::numbers::pi / kAngularBins;

    std::vector<double> values(kRadialBins + kAngularBins, 0.0);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (u == cx && v == cy)
                continue;
            const double fu = static_cast<double>(u - cx) / w;
            const double fv = static_cast<double>(v - cy) / h;
            const double p = ps.at(u, v);

            // Rings (k/9, (k+1)/9] of the radius normalized to the Nyquist corner.
            const double r = std::hypot(fu, fv) / nyquist_corner;
            const int ring = std::clamp(static_cast<int>(std::ceil(r * kRadialBins)) - 1, 0, kRadialBins - 1);
            values[ring] += p;

            // Real-input spectra are point-symmetric, so fold angles into [0, pi).
            double theta = std::atan2(fv, fu);
            if (theta < 0.0)
                theta += std::numbers::pi;
            if (theta >= std::numbers::pi)
                theta -= std::numbers::pi;
            const int wedge = std::min(static_cast<int>(theta / sector), kAngularBins - 1);
            values[kRadialBins + wedge] += p;
        }
    }
    return FeatureVector{feature_names(FeatureFamily::Fps), std::move(values)};
}

}  // namespace moist
