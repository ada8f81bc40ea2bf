#include "moist/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "moist/dataset.hpp"
#include "moist/fft.hpp"

namespace moist {

void DomainSpec::validate() const {
    if (!(contrast_gain > 0) || !(gamma > 0) || !(blur_radius >= 0) || !(noise_sigma >= 0))
        throw std::invalid_argument("domain '" + name + "': invalid transform parameters");
}

const std::vector<ClassSpec>& default_classes() {
    static const std::vector<ClassSpec> classes = {{0, 3.0, 0.05}, {1, 6.0, 0.15}, {2, 12.0, 0.3}};
    return classes;
}

namespace {

constexpr double kFrequencyJitter = 0.15;  // log-normal sigma
constexpr double kRoughnessJitter = 0.05;
constexpr double kContrastJitter = 0.1;  // log-normal sigma
constexpr double kLevelJitter = 0.03;

void normalize(std::vector<double>& v) {
    double mean = 0, var = 0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v)
        var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    for (double& x : v)
        x = sd > 0 ? (x - mean) / sd : 0.0;
}

// Signed frequency index of DFT bin k for length n.
double signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

std::vector<double> band_pass_field(std::mt19937_64& rng, int size, double f0) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> grid(static_cast<std::size_t>(size) * size);
    for (auto& c : grid)
        c = g(rng);
    dft2d_inplace(grid, size, size);
    const double bw = std::max(1.0, 0.25 * f0);
    for (int v = 0; v < size; ++v)
        for (int u = 0; u < size; ++u) {
            const double r = std::hypot(signed_freq(u, size), signed_freq(v, size));
            const double d = (r - f0) / bw;
            grid[static_cast<std::size_t>(v) * size + u] *= std::exp(-0.5 * d * d);
        }
    dft2d_inplace(grid, size, size, true);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = grid[i].real();
    normalize(out);
    return out;
}

int reflect(int i, int n) {
    while (i < 0 || i >= n)
        i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
}

void gaussian_blur(std::vector<double>& img, int size, double sigma) {
    if (sigma <= 0)
        return;
    const int radius = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0;
    for (int k = -radius; k <= radius; ++k)
        total += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    for (double& k : kernel)
        k /= total;
    std::vector<double> tmp(img.size());
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double s = 0;
            for (int k = -radius; k <= radius; ++k)
                s += kernel[k + radius] * img[static_cast<std::size_t>(y) * size + reflect(x + k, size)];
            tmp[static_cast<std::size_t>(y) * size + x] = s;
        }
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double s = 0;
            for (int k = -radius; k <= radius; ++k)
                s += kernel[k + radius] * tmp[static_cast<std::size_t>(reflect(y + k, size)) * size + x];
            img[static_cast<std::size_t>(y) * size + x] = s;
        }
}

}  // namespace

GrayImage generate_image(const DomainSpec& domain, const ClassSpec& cls, int size, std::uint64_t seed) {
    if (size < 32)
        throw std::invalid_argument("generate_image: size must be at least 32");
    if (cls.frequency <= 0 || cls.roughness < 0 || cls.roughness > 1)
        throw std::invalid_argument("generate_image: invalid class parameters");
    domain.validate();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    // Per-image nuisance so that classes overlap.
    const double frequency = cls.frequency * std::exp(kFrequencyJitter * g(rng));
    const double roughness = std::clamp(cls.roughness + kRoughnessJitter * g(rng), 0.0, 1.0);
    const double spread = 0.16 * std::exp(kContrastJitter * g(rng));
    const double level = 0.5 + kLevelJitter * g(rng);

    std::vector<double> field = band_pass_field(rng, size, frequency);
    const double a = std::sqrt(1 - roughness), b = std::sqrt(roughness);
    for (double& v : field)
        v = a * v + b * g(rng);
    normalize(field);

    // Texture intensity in [0, 1], then the domain regime.
    for (double& v : field) {
        double t = std::clamp(level + spread * v, 0.0, 1.0);
        t = std::pow(t, domain.gamma);
        t = 0.5 + domain.contrast_gain * (t - 0.5);
        v = 255.0 * t + domain.brightness_offset;
    }
    gaussian_blur(field, size, domain.blur_radius);
    std::mt19937_64 noise_rng(seed ^ 0xd1b54a32d192ed03ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::uint8_t> px(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        double v = field[i];
        if (domain.noise_sigma > 0)
            v += domain.noise_sigma * noise(noise_rng);
        px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return GrayImage(size, size, std::move(px));
}

std::string_view shift_name(Shift s) noexcept {
    switch (s) {
        case Shift::None: return "none";
        case Shift::Mild: return "mild";
        case Shift::Strong: return "strong";
    }
    return "";
}

std::optional<Shift> parse_shift(std::string_view name) noexcept {
    for (Shift s : {Shift::None, Shift::Mild, Shift::Strong})
        if (shift_name(s) == name)
            return s;
    return std::nullopt;
}

DomainSpec target_domain(Shift s) {
    switch (s) {
        case Shift::None: return DomainSpec{};
        case Shift::Mild: return DomainSpec{"mild", 15, 0.9, 0.9, 0.0, 0.0};
        case Shift::Strong: return DomainSpec{"strong", 60, 0.75, 0.7, 0.4, 3.0};
    }
    throw std::invalid_argument("unknown shift");
}

std::uint64_t image_seed(std::uint64_t scenario_seed, int domain, int label, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(scenario_seed), static_cast<std::uint32_t>(scenario_seed >> 32),
                      static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(label),
                      static_cast<std::uint32_t>(index)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ScenarioSummary generate_scenario(Shift shift, int per_class, std::uint64_t seed, const std::filesystem::path& out_dir,
                                  int size) {
    if (per_class < 10)
        throw std::invalid_argument("generate_scenario: per-class count must be at least 10");
    const DomainSpec domains[2] = {DomainSpec{"source"}, target_domain(shift)};
    const char* dir_names[2] = {"source", "target"};
    ScenarioSummary summary;
    for (int d = 0; d < 2; ++d) {
        const std::filesystem::path dir = out_dir / dir_names[d];
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create " + dir.string() + ": " + ec.message());
        std::string labels = "id,domain,label\n";
        for (const ClassSpec& cls : default_classes()) {
            for (int i = 0; i < per_class; ++i) {
                char stem[64];
                std::snprintf(stem, sizeof stem, "img_%s_%03d", std::string(class_name(cls.label)).c_str(), i);
                save_png(generate_image(domains[d], cls, size, image_seed(seed, d, cls.label, i)),
                         dir / (std::string(stem) + ".png"));
                labels += std::string(stem) + "," + dir_names[d] + "," + std::string(class_name(cls.label)) + "\n";
                ++summary.images;
            }
        }
        const std::filesystem::path label_file = dir / "labels.csv";
        std::ofstream out(label_file, std::ios::binary);
        if (!out || !(out << labels))
            throw IoError("cannot write " + label_file.string());
        summary.label_files.push_back(label_file);
    }
    return summary;
}

}  // namespace moist
