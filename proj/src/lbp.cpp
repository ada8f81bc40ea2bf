#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "moist/features.hpp"

namespace moist {

namespace {

// Snaps values that trigonometry left a hair away from an integer.
double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace

int uniform_ri_bin(unsigned long pattern, int points) noexcept {
    int transitions = 0;
    for (int k = 0; k < points; ++k) {
        const bool a = (pattern >> k) & 1UL;
        const bool b = (pattern >> ((k + 1) % points)) & 1UL;
        transitions += a != b;
    }
    return transitions <= 2 ? std::popcount(pattern) : points + 1;
}

LbpHistogram lbp_histogram(const GrayImage& img, double radius, int points) {
    if (!(radius > 0.0) || points < 1 || points > 63)
        throw std::invalid_argument("lbp_histogram: radius must be positive and points in [1, 63]");
    const int margin = static_cast<int>(std::ceil(radius));
    const int w = img.width(), h = img.height();
    if (w <= 2 * margin || h <= 2 * margin)
        throw std::invalid_argument("lbp_histogram: image too small for radius");

    std::vector<double> ox(points), oy(points);
    for (int k = 0; k < points; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / points;
        ox[k] = snap(radius * std::cos(angle));
        oy[k] = snap(-radius * std::sin(angle));
    }

    std::vector<double> bins(points + 2, 0.0);
    long total = 0;
    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            const int center = img.at(x, y);
            unsigned long pattern = 0;
            for (int k = 0; k < points; ++k) {
                const double sx = x + ox[k], sy = y + oy[k];
                const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
                const double fx = sx - x0, fy = sy - y0;
                const int x1 = fx > 0.0 ? x0 + 1 : x0, y1 = fy > 0.0 ? y0 + 1 : y0;
                // Interpolate differences from the center so that a constant
                // brightness offset cannot change any comparison.
                const double d00 = img.at(x0, y0) - center, d10 = img.at(x1, y0) - center;
                const double d01 = img.at(x0, y1) - center, d11 = img.at(x1, y1) - center;
                const double top = d00 + fx * (d10 - d00);
                const double bottom = d01 + fx * (d11 - d01);
                if (top + fy * (bottom - top) >= 0.0)
                    pattern |= 1UL << k;
            }
            bins[uniform_ri_bin(pattern, points)] += 1.0;
            ++total;
        }
    }
    for (double& b : bins)
        b /= static_cast<double>(total);
    return LbpHistogram{radius, points, std::move(bins)};
}

double histogram_energy(const std::vector<double>& bins) noexcept {
    double e = 0;
    for (double b : bins)
        e += b * b;
    return e;
}

double histogram_entropy(const std::vector<double>& bins) noexcept {
    double e = 0;
    for (double b : bins)
        if (b > 0.0)
            e -= b * std::log(b);
    return e;
}

FeatureVector lbp_features(const GrayImage& img) {
    static constexpr std::pair<int, int> kScales[] = {{1, 8}, {2, 16}, {3, 24}};
    FeatureVector out{feature_names(FeatureFamily::Lbp), {}};
    for (const auto& [radius, points] : kScales) {
        const LbpHistogram hist = lbp_histogram(img, radius, points);
        out.values.push_back(histogram_energy(hist.bins));
        out.values.push_back(histogram_entropy(hist.bins));
    }
    return out;
}

}  // namespace moist
