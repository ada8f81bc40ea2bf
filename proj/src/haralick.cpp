#include <cmath>
#include <stdexcept>

#include "moist/features.hpp"

namespace moist {

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

Glcm glcm(const QuantizedImage& q, int dx, int dy) {
    if (dx == 0 && dy == 0)
        throw std::invalid_argument("glcm: offset must be non-zero");
    if (std::abs(dx) >= q.width() || std::abs(dy) >= q.height())
        throw std::invalid_argument("glcm: offset exceeds image extent");

    const int n = q.levels();
    std::vector<double> counts(static_cast<std::size_t>(n) * n, 0.0);
    long pairs = 0;
    const int x_begin = std::max(0, -dx), x_end = std::min(q.width(), q.width() - dx);
    const int y_begin = std::max(0, -dy), y_end = std::min(q.height(), q.height() - dy);
    for (int y = y_begin; y < y_end; ++y) {
        for (int x = x_begin; x < x_end; ++x) {
            const int a = q.at(x, y);
            const int b = q.at(x + dx, y + dy);
            counts[static_cast<std::size_t>(a) * n + b] += 1.0;
            counts[static_cast<std::size_t>(b) * n + a] += 1.0;
            ++pairs;
        }
    }
    const double total = 2.0 * static_cast<double>(pairs);
    for (double& c : counts)
        c /= total;
    return Glcm{n, std::move(counts)};
}

std::array<double, 13> haralick_statistics(const Glcm& m) {
    const int n = m.levels;
    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> p_sum(2 * n - 1, 0.0), p_diff(n, 0.0);

    double asm_ = 0, contrast = 0, idm = 0, entropy = 0, sum_ij = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m.at(i, j);
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            p_diff[std::abs(i - j)] += p;
            const double d = i - j;
            asm_ += p * p;
            contrast += d * d * p;
            idm += p / (1.0 + d * d);
            entropy -= xlogx(p);
            sum_ij += static_cast<double>(i) * j * p;
        }
    }

    double mu_x = 0, mu_y = 0;
    for (int i = 0; i < n; ++i) {
        mu_x += i * px[i];
        mu_y += i * py[i];
    }
    double var_x = 0, var_y = 0, hx = 0, hy = 0;
    for (int i = 0; i < n; ++i) {
        var_x += (i - mu_x) * (i - mu_x) * px[i];
        var_y += (i - mu_y) * (i - mu_y) * py[i];
        hx -= xlogx(px[i]);
        hy -= xlogx(py[i]);
    }
    const double sd_prod = std::sqrt(var_x * var_y);
    // A single occupied level has no spread; treat it as perfectly correlated.
    const double correlation = sd_prod > 1e-15 ? (sum_ij - mu_x * mu_y) / sd_prod : 1.0;

    double sum_avg = 0, sum_entropy = 0;
    for (int k = 0; k < 2 * n - 1; ++k) {
        sum_avg += k * p_sum[k];
        sum_entropy -= xlogx(p_sum[k]);
    }
    double sum_var = 0;
    for (int k = 0; k < 2 * n - 1; ++k)
        sum_var += (k - sum_avg) * (k - sum_avg) * p_sum[k];

    double diff_mean = 0, diff_entropy = 0;
    for (int k = 0; k < n; ++k) {
        diff_mean += k * p_diff[k];
        diff_entropy -= xlogx(p_diff[k]);
    }
    double diff_var = 0;
    for (int k = 0; k < n; ++k)
        diff_var += (k - diff_mean) * (k - diff_mean) * p_diff[k];

    double hxy1 = 0, hxy2 = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double q = px[i] * py[j];
            if (q <= 0.0)
                continue;
            const double lq = std::log(q);
            hxy1 -= m.at(i, j) * lq;
            hxy2 -= q * lq;
        }
    }
    const double h_max = std::max(hx, hy);
    const double imc1 = h_max > 0.0 ? (entropy - hxy1) / h_max : 0.0;
    const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - entropy))));

    return {asm_,     contrast,    correlation, var_x,     idm,          sum_avg, sum_var,
            sum_entropy, entropy, diff_var,    diff_entropy, imc1,     imc2};
}

FeatureVector haralick_features(const GrayImage& img) {
    static constexpr int kOffsets[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
    const QuantizedImage q = quantize(img, kMatrixLevels);
    std::array<double, 13> mean{};
    for (const auto& off : kOffsets) {
        const auto stats = haralick_statistics(glcm(q, off[0], off[1]));
        for (std::size_t k = 0; k < stats.size(); ++k)
            mean[k] += stats[k];
    }
    FeatureVector out{feature_names(FeatureFamily::Haralick), {}};
    out.values.reserve(mean.size());
    for (double v : mean)
        out.values.push_back(v / 4.0);
    return out;
}

}  // namespace moist
