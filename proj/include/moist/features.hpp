#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moist/image.hpp"

namespace moist {

/// Ordered named real features. Names and values have equal length.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

enum class FeatureFamily { Haralick, Fos, Fps, Glrlm, Lbp, Combined };

std::string_view family_name(FeatureFamily family) noexcept;
std::optional<FeatureFamily> parse_family(std::string_view name) noexcept;
const std::vector<FeatureFamily>& all_families() noexcept;

/// Canonical, fixed-order feature names of a family.
const std::vector<std::string>& feature_names(FeatureFamily family);

/// Dispatches to the family extractor below.
FeatureVector extract_features(const GrayImage& img, FeatureFamily family);

/// JSON manifest {"<family>": [names...], ...} for every family, pretty-printed.
std::string feature_manifest_json();

// ---------------------------------------------------------------------------
// Co-occurrence (Haralick)

inline constexpr int kMatrixLevels = 32;

/// Symmetric, normalized gray-level co-occurrence matrix.
struct Glcm {
    int levels = 0;
    std::vector<double> entries;  // levels x levels, row-major

    double at(int i, int j) const noexcept { return entries[static_cast<std::size_t>(i) * levels + j]; }
};

Glcm glcm(const QuantizedImage& q, int dx, int dy);

/// The 13 classical statistics of one GLCM, in manifest order. Gray levels
/// are 0-based.
std::array<double, 13> haralick_statistics(const Glcm& m);

/// Quantize to 32 levels, average the statistics over offsets
/// (1,0), (1,1), (0,1), (-1,1) at distance 1.
FeatureVector haralick_features(const GrayImage& img);

// ---------------------------------------------------------------------------
// First-order statistics

FeatureVector fos_features(const GrayImage& img);

/// Linear interpolation between closest ranks; `sorted` must be ascending and
/// non-empty, q in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double q);

// ---------------------------------------------------------------------------
// Fourier power spectrum

/// |F(u,v)|^2 shifted so the zero frequency sits at (width/2, height/2).
struct PowerSpectrum {
    int width = 0;
    int height = 0;
    std::vector<double> power;  // row-major, index v*width + u over shifted coordinates

    double at(int u, int v) const noexcept { return power[static_cast<std::size_t>(v) * width + u]; }
};

inline constexpr int kRadialBins = 9;
inline constexpr int kAngularBins = 8;

/// Centered power spectrum. Unless `keep_dc` is set, the DC cell is zeroed.
PowerSpectrum power_spectrum(const GrayImage& img, bool keep_dc = false);

/// 9 radial ring sums followed by 8 angular sector sums of the DC-free spectrum.
FeatureVector fps_features(const GrayImage& img);

// ---------------------------------------------------------------------------
// Run lengths

enum class RunDirection { Deg0, Deg45, Deg90, Deg135 };

/// counts[level][length-1], one entry per maximal run along one direction.
struct RunLengthMatrix {
    int levels = 0;
    int max_run = 0;
    std::vector<long> counts;  // levels x max_run, row-major
    long total_runs = 0;
    long total_pixels = 0;

    long at(int level, int length) const noexcept {
        return counts[static_cast<std::size_t>(level) * max_run + (length - 1)];
    }
};

RunLengthMatrix glrlm(const QuantizedImage& q, RunDirection direction);

/// The 11 run-length statistics, 1-based gray levels and run lengths,
/// normalized by the total run count.
std::array<double, 11> glrlm_statistics(const RunLengthMatrix& m);

/// Quantize to 32 levels, average the statistics over the four directions.
FeatureVector glrlm_features(const GrayImage& img);

// ---------------------------------------------------------------------------
// Local binary patterns

/// Uniform rotation-invariant histogram with points + 2 bins.
struct LbpHistogram {
    double radius = 0;
    int points = 0;
    std::vector<double> bins;
};

/// Bin of a `points`-bit circular pattern under the uniform rotation-invariant
/// mapping: popcount when there are at most two 0/1 transitions, otherwise
/// points + 1.
int uniform_ri_bin(unsigned long pattern, int points) noexcept;

LbpHistogram lbp_histogram(const GrayImage& img, double radius, int points);

/// Sum of squared bins and natural-log entropy (0 log 0 = 0) of a histogram.
double histogram_energy(const std::vector<double>& bins) noexcept;
double histogram_entropy(const std::vector<double>& bins) noexcept;

/// Energy and entropy for (R, P) in {(1, 8), (2, 16), (3, 24)}.
FeatureVector lbp_features(const GrayImage& img);

// ---------------------------------------------------------------------------

/// Haralick(13) | FOS(16) | FPS(17) | GLRLM(11) | LBP(6), 63 values.
FeatureVector combined_features(const GrayImage& img);

}  // namespace moist
