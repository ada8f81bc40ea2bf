#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "moist/features.hpp"

namespace moist {

double percentile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty())
        throw std::invalid_argument("percentile_sorted: empty input");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FeatureVector fos_features(const GrayImage& img) {
    const auto& px = img.pixels();
    const double n = static_cast<double>(px.size());

    std::array<long, 256> hist{};
    double sum = 0, energy = 0;
    for (std::uint8_t v : px) {
        ++hist[v];
        sum += v;
        energy += static_cast<double>(v) * v;
    }
    const double mean = sum / n;

    double m2 = 0, m3 = 0, m4 = 0;
    for (std::uint8_t v : px) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double sd = std::sqrt(m2);
    const double skewness = sd > 0.0 ? m3 / (sd * sd * sd) : 0.0;
    const double kurtosis = sd > 0.0 ? m4 / (m2 * m2) : 0.0;

    int mode = 0, lo = 255, hi = 0;
    double entropy = 0;
    for (int v = 0; v < 256; ++v) {
        if (hist[v] == 0)
            continue;
        if (hist[v] > hist[mode])
            mode = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        const double p = static_cast<double>(hist[v]) / n;
        entropy -= p * std::log(p);
    }
    std::vector<double> sorted;
    sorted.reserve(px.size());
    for (int v = 0; v < 256; ++v)
        sorted.insert(sorted.end(), static_cast<std::size_t>(hist[v]), static_cast<double>(v));

    const double cov = mean != 0.0 ? sd / mean : 0.0;

    return FeatureVector{feature_names(FeatureFamily::Fos),
                         {mean, m2, percentile_sorted(sorted, 0.5), static_cast<double>(mode), skewness, kurtosis,
                          energy, entropy, static_cast<double>(lo), static_cast<double>(hi), cov,
                          percentile_sorted(sorted, 0.10), percentile_sorted(sorted, 0.25),
                          percentile_sorted(sorted, 0.75), percentile_sorted(sorted, 0.90),
                          static_cast<double>(hi - lo)}};
}

}  // namespace moist
