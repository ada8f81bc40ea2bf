#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moist {

enum class MoistureClass { Dry = 0, Medium = 1, Wet = 2 };
inline constexpr int kClassCount = 3;

std::string_view class_name(int label);
std::optional<int> parse_class(std::string_view name) noexcept;

struct Sample {
    std::string id;
    std::vector<double> features;
    std::optional<int> label;
    std::string domain;
};

struct Dataset {
    std::vector<std::string> schema;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    bool fully_labeled() const;

    /// Labels of every sample; throws if any is missing.
    std::vector<int> labels() const;
    std::vector<std::vector<double>> matrix() const;
    Dataset subset(std::span<const std::size_t> indices) const;

    /// Throws std::invalid_argument on a schema/width mismatch, a duplicate id,
    /// a non-finite feature or an out-of-range label.
    void validate() const;
};

/// Column-wise z-scoring with population standard deviation. Zero deviations
/// are replaced by 1 so constant columns map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows);
    static Standardizer fit(const Dataset& ds);

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<std::vector<double>> apply(const std::vector<std::vector<double>>& rows) const;
    Dataset apply(const Dataset& ds) const;
};

/// Feature CSV: header id,domain,label,<feature names>. Labels are class
/// names or empty. The feature names must equal one family's list.
Dataset read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const std::filesystem::path& path, const Dataset& ds);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Splits one CSV line on commas. Quoting is not supported.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace moist
