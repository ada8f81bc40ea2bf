#include <stdexcept>

#include "json.hpp"

#include "moist/features.hpp"

namespace moist {

namespace {

std::vector<std::string> prefixed(const std::string& prefix, std::initializer_list<const char*> names) {
    std::vector<std::string> out;
    for (const char* n : names)
        out.push_back(prefix + n);
    return out;
}

std::vector<std::string> fps_names() {
    std::vector<std::string> out;
    for (int k = 1; k <= kRadialBins; ++k)
        out.push_back("FPS_RadialSum_" + std::to_string(k));
    for (int k = 1; k <= kAngularBins; ++k)
        out.push_back("FPS_AngularSum_" + std::to_string(k));
    return out;
}

const std::vector<std::string>& names_of(FeatureFamily family) {
    static const std::vector<std::string> haralick = prefixed(
        "Haralick_", {"AngularSecondMoment", "Contrast", "Correlation", "SumOfSquaresVariance",
                      "InverseDifferenceMoment", "SumAverage", "SumVariance", "SumEntropy", "Entropy",
                      "DifferenceVariance", "DifferenceEntropy", "InformationCorrelation1",
                      "InformationCorrelation2"});
    static const std::vector<std::string> fos =
        prefixed("FOS_", {"Mean", "Variance", "Median", "Mode", "Skewness", "Kurtosis", "Energy", "Entropy",
                          "MinimalGrayLevel", "MaximalGrayLevel", "CoefficientOfVariation", "10Percentile",
                          "25Percentile", "75Percentile", "90Percentile", "HistogramWidth"});
    static const std::vector<std::string> fps = fps_names();
    static const std::vector<std::string> glrlm = prefixed(
        "GLRLM_", {"ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity", "RunLengthNonUniformity",
                   "RunPercentage", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
                   "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
                   "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"});
    static const std::vector<std::string> lbp =
        prefixed("LBP_", {"R_1_P_8_Energy", "R_1_P_8_Entropy", "R_2_P_16_Energy", "R_2_P_16_Entropy",
                          "R_3_P_24_Energy", "R_3_P_24_Entropy"});
    static const std::vector<std::string> combined = [] {
        std::vector<std::string> out;
        for (const auto* part : {&haralick, &fos, &fps, &glrlm, &lbp})
            out.insert(out.end(), part->begin(), part->end());
        return out;
    }();

    switch (family) {
        case FeatureFamily::Haralick: return haralick;
        case FeatureFamily::Fos: return fos;
        case FeatureFamily::Fps: return fps;
        case FeatureFamily::Glrlm: return glrlm;
        case FeatureFamily::Lbp: return lbp;
        case FeatureFamily::Combined: return combined;
    }
    throw std::invalid_argument("unknown feature family");
}

}  // namespace

std::string_view family_name(FeatureFamily family) noexcept {
    switch (family) {
        case FeatureFamily::Haralick: return "haralick";
        case FeatureFamily::Fos: return "fos";
        case FeatureFamily::Fps: return "fps";
        case FeatureFamily::Glrlm: return "glrlm";
        case FeatureFamily::Lbp: return "lbp";
        case FeatureFamily::Combined: return "combined";
    }
    return "";
}

const std::vector<FeatureFamily>& all_families() noexcept {
    static const std::vector<FeatureFamily> all = {FeatureFamily::Haralick, FeatureFamily::Fos,
                                                   FeatureFamily::Fps,      FeatureFamily::Glrlm,
                                                   FeatureFamily::Lbp,      FeatureFamily::Combined};
    return all;
}

std::optional<FeatureFamily> parse_family(std::string_view name) noexcept {
    for (FeatureFamily f : all_families())
        if (family_name(f) == name)
            return f;
    return std::nullopt;
}

const std::vector<std::string>& feature_names(FeatureFamily family) { return names_of(family); }

FeatureVector extract_features(const GrayImage& img, FeatureFamily family) {
    switch (family) {
        case FeatureFamily::Haralick: return haralick_features(img);
        case FeatureFamily::Fos: return fos_features(img);
        case FeatureFamily::Fps: return fps_features(img);
        case FeatureFamily::Glrlm: return glrlm_features(img);
        case FeatureFamily::Lbp: return lbp_features(img);
        case FeatureFamily::Combined: return combined_features(img);
    }
    throw std::invalid_argument("unknown feature family");
}

FeatureVector combined_features(const GrayImage& img) {
    if (img.width() < 8 || img.height() < 8)
        throw std::invalid_argument("combined_features: image must be at least 8x8");
    FeatureVector out{feature_names(FeatureFamily::Combined), {}};
    out.values.reserve(out.names.size());
    for (auto* extractor : {&haralick_features, &fos_features, &fps_features, &glrlm_features, &lbp_features}) {
        const FeatureVector part = extractor(img);
        out.values.insert(out.values.end(), part.values.begin(), part.values.end());
    }
    return out;
}

std::string feature_manifest_json() {
    nlohmann::ordered_json j;
    for (FeatureFamily f : all_families())
        j[std::string(family_name(f))] = feature_names(f);
    return j.dump(2) + "\n";
}

}  // namespace moist
