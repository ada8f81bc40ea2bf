#include <algorithm>

#include "moist/features.hpp"

namespace moist {

namespace {

struct Step {
    int dx, dy;
};

Step step_of(RunDirection d) {
    switch (d) {
        case RunDirection::Deg0: return {1, 0};
        case RunDirection::Deg45: return {1, -1};
        case RunDirection::Deg90: return {0, 1};
        case RunDirection::Deg135: return {1, 1};
    }
    return {1, 0};
}

}  // namespace

RunLengthMatrix glrlm(const QuantizedImage& q, RunDirection direction) {
    const int w = q.width(), h = q.height();
    const Step s = step_of(direction);
    RunLengthMatrix m;
    m.levels = q.levels();
    m.max_run = std::max(w, h);
    m.counts.assign(static_cast<std::size_t>(m.levels) * m.max_run, 0);
    m.total_pixels = static_cast<long>(w) * h;

    auto inside = [&](int x, int y) { return x >= 0 && x < w && y >= 0 && y < h; };
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            // Walk each scan line once, from the pixel with no predecessor.
            if (inside(x0 - s.dx, y0 - s.dy))
                continue;
            int x = x0, y = y0;
            while (inside(x, y)) {
                const int level = q.at(x, y);
                int length = 0;
                while (inside(x, y) && q.at(x, y) == level) {
                    ++length;
                    x += s.dx;
                    y += s.dy;
                }
                ++m.counts[static_cast<std::size_t>(level) * m.max_run + (length - 1)];
                ++m.total_runs;
            }
        }
    }
    return m;
}

std::array<double, 11> glrlm_statistics(const RunLengthMatrix& m) {
    std::array<double, 11> s{};
    std::vector<double> level_sums(m.levels, 0.0), length_sums(m.max_run, 0.0);
    for (int li = 0; li < m.levels; ++li) {
        const double i = li + 1;
        const double i2 = i * i;
        for (int j_len = 1; j_len <= m.max_run; ++j_len) {
            const double p = static_cast<double>(m.at(li, j_len));
            if (p == 0.0)
                continue;
            const double j2 = static_cast<double>(j_len) * j_len;
            level_sums[li] += p;
            length_sums[j_len - 1] += p;
            s[0] += p / j2;
            s[1] += p * j2;
            s[5] += p / i2;
            s[6] += p * i2;
            s[7] += p / (i2 * j2);
            s[8] += p * i2 / j2;
            s[9] += p * j2 / i2;
            s[10] += p * i2 * j2;
        }
    }
    for (double v : level_sums)
        s[2] += v * v;
    for (double v : length_sums)
        s[3] += v * v;

    const double runs = static_cast<double>(m.total_runs);
    for (std::size_t k = 0; k < s.size(); ++k)
        if (k != 4)
            s[k] /= runs;
    s[4] = runs / static_cast<double>(m.total_pixels);
    return s;
}

FeatureVector glrlm_features(const GrayImage& img) {
    const QuantizedImage q = quantize(img, kMatrixLevels);
    std::array<double, 11> mean{};
    for (RunDirection d : {RunDirection::Deg0, RunDirection::Deg45, RunDirection::Deg90, RunDirection::Deg135}) {
        const auto stats = glrlm_statistics(glrlm(q, d));
        for (std::size_t k = 0; k < stats.size(); ++k)
            mean[k] += stats[k];
    }
    FeatureVector out{feature_names(FeatureFamily::Glrlm), {}};
    for (double v : mean)
        out.values.push_back(v / 4.0);
    return out;
}

}  // namespace moist
