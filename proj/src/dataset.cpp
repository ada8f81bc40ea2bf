#include "moist/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "moist/features.hpp"
#include "moist/image.hpp"

namespace moist {

namespace {

constexpr std::string_view kClassNames[kClassCount] = {"Dry", "Medium", "Wet"};

}  // namespace

std::string_view class_name(int label) {
    if (label < 0 || label >= kClassCount)
        throw std::invalid_argument("class label out of range");
    return kClassNames[label];
}

std::optional<int> parse_class(std::string_view name) noexcept {
    for (int k = 0; k < kClassCount; ++k)
        if (kClassNames[k] == name)
            return k;
    return std::nullopt;
}

bool Dataset::fully_labeled() const {
    for (const Sample& s : samples)
        if (!s.label)
            return false;
    return true;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        if (!s.label)
            throw std::invalid_argument("sample '" + s.id + "' has no label");
        out.push_back(*s.label);
    }
    return out;
}

std::vector<std::vector<double>> Dataset::matrix() const {
    std::vector<std::vector<double>> out;
    out.reserve(samples.size());
    for (const Sample& s : samples)
        out.push_back(s.features);
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out{schema, {}};
    out.samples.reserve(indices.size());
    for (std::size_t i : indices)
        out.samples.push_back(samples.at(i));
    return out;
}

void Dataset::validate() const {
    std::set<std::string> ids;
    for (const Sample& s : samples) {
        if (s.features.size() != schema.size())
            throw std::invalid_argument("sample '" + s.id + "' does not match the feature schema");
        if (!ids.insert(s.id).second)
            throw std::invalid_argument("duplicate sample id '" + s.id + "'");
        for (double v : s.features)
            if (!std::isfinite(v))
                throw std::invalid_argument("sample '" + s.id + "' has a non-finite feature");
        if (s.label && (*s.label < 0 || *s.label >= kClassCount))
            throw std::invalid_argument("sample '" + s.id + "' has an invalid label");
    }
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty())
        throw std::invalid_argument("standardizer: empty training set");
    const std::size_t dim = rows.front().size();
    const double n = static_cast<double>(rows.size());
    Standardizer s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (const auto& r : rows) {
        if (r.size() != dim)
            throw std::invalid_argument("standardizer: ragged rows");
        for (std::size_t d = 0; d < dim; ++d)
            s.mean[d] += r[d];
    }
    for (double& m : s.mean)
        m /= n;
    for (const auto& r : rows)
        for (std::size_t d = 0; d < dim; ++d) {
            const double c = r[d] - s.mean[d];
            s.scale[d] += c * c;
        }
    for (double& v : s.scale) {
        v = std::sqrt(v / n);
        if (v == 0.0)
            v = 1.0;
    }
    return s;
}

Standardizer Standardizer::fit(const Dataset& ds) { return fit(ds.matrix()); }

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean.size())
        throw std::invalid_argument("standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d)
        out[d] = (x[d] - mean[d]) / scale[d];
    return out;
}

std::vector<std::vector<double>> Standardizer::apply(const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(apply(r));
    return out;
}

Dataset Standardizer::apply(const Dataset& ds) const {
    Dataset out = ds;
    for (Sample& s : out.samples)
        s.features = apply(s.features);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

namespace {

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line) {
    double v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
        throw FormatError(path.string() + ":" + std::to_string(line) + ": bad feature value '" + text + "'");
    return v;
}

void check_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") != std::string::npos)
        throw std::invalid_argument("CSV cell contains a reserved character: '" + cell + "'");
}

}  // namespace

Dataset read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "domain" || header[2] != "label")
        throw FormatError(path.string() + ": header must start with id,domain,label");
    Dataset ds;
    ds.schema.assign(header.begin() + 3, header.end());
    bool known = false;
    for (FeatureFamily f : all_families())
        known = known || feature_names(f) == ds.schema;
    if (!known)
        throw FormatError(path.string() + ": feature columns do not match any known family");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " cells");
        Sample s;
        s.id = cells[0];
        s.domain = cells[1];
        if (!cells[2].empty()) {
            s.label = parse_class(cells[2]);
            if (!s.label)
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": unknown label '" + cells[2] +
                                  "'");
        }
        s.features.reserve(ds.schema.size());
        for (std::size_t c = 3; c < cells.size(); ++c)
            s.features.push_back(parse_double(cells[c], path, lineno));
        ds.samples.push_back(std::move(s));
    }
    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return ds;
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& ds) {
    ds.validate();
    std::string text = "id,domain,label";
    for (const auto& n : ds.schema)
        text += "," + n;
    text += "\n";
    for (const Sample& s : ds.samples) {
        check_cell(s.id);
        check_cell(s.domain);
        text += s.id + "," + s.domain + ",";
        if (s.label)
            text += class_name(*s.label);
        for (double v : s.features)
            text += "," + format_double(v);
        text += "\n";
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
}

}  // namespace moist
