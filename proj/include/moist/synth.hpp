#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moist/image.hpp"

namespace moist {

/// Photometric regime applied after texture synthesis.
struct DomainSpec {
    std::string name = "identity";
    int brightness_offset = 0;
    double contrast_gain = 1.0;
    double gamma = 1.0;
    double blur_radius = 0.0;  // Gaussian sigma in pixels
    double noise_sigma = 0.0;  // gray levels

    void validate() const;
};

struct ClassSpec {
    int label = 0;
    double frequency = 4.0;  // dominant spatial frequency, cycles per image
    double roughness = 0.1;  // share of broadband noise in [0, 1]
};

/// Default texture parameters for Dry, Medium and Wet.
const std::vector<ClassSpec>& default_classes();

inline constexpr int kDefaultImageSize = 64;

GrayImage generate_image(const DomainSpec& domain, const ClassSpec& cls, int size, std::uint64_t seed);

enum class Shift { None, Mild, Strong };

std::string_view shift_name(Shift s) noexcept;
std::optional<Shift> parse_shift(std::string_view name) noexcept;

/// The target-domain regime for a shift level; the source is always identity.
DomainSpec target_domain(Shift s);

struct ScenarioSummary {
    int images = 0;
    std::vector<std::filesystem::path> label_files;
};

/// Writes outDir/{source,target}/img_<class>_<index>.png and a labels.csv
/// (id,domain,label) in each domain directory. Ids are the PNG file stems.
ScenarioSummary generate_scenario(Shift shift, int per_class, std::uint64_t seed, const std::filesystem::path& out_dir,
                                  int size = kDefaultImageSize);

/// Seed of image `index` of class `label` in domain `domain` (0 source, 1 target).
std::uint64_t image_seed(std::uint64_t scenario_seed, int domain, int label, int index);

}  // namespace moist
