#include "moist/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace moist {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

namespace {

void check_points(const std::vector<Point>& points, int k) {
    if (points.empty())
        throw std::invalid_argument("kmeans: no points");
    if (k < 1 || static_cast<std::size_t>(k) > points.size())
        throw std::invalid_argument("kmeans: k must be in [1, number of points]");
    const std::size_t dim = points.front().size();
    for (const Point& p : points) {
        if (p.size() != dim)
            throw std::invalid_argument("kmeans: points have different dimensions");
        for (double v : p)
            if (!std::isfinite(v))
                throw std::invalid_argument("kmeans: non-finite coordinate");
    }
}

std::vector<Point> plus_plus_seeds(const std::vector<Point>& points, int k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<Point> centers;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centers.push_back(points[pick(rng)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i)
        d2[i] = squared_distance(points[i], centers[0]);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0;
        for (double d : d2)
            total += d;
        std::size_t chosen = 0;
        if (total > 0) {
            const double target = unit(rng) * total;
            double acc = 0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);  // every point coincides with a center already
        }
        centers.push_back(points[chosen]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
    return centers;
}

// Assigns every point to its nearest centroid (lowest index on ties) and
// returns the inertia.
double assign(const std::vector<Point>& points, const std::vector<Point>& centroids, std::vector<int>& labels) {
    double inertia = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[i] = arg;
        inertia += best;
    }
    return inertia;
}


}  // namespace

KMeansResult kmeans_single(const std::vector<Point>& points, int k, std::uint64_t seed, const KMeansOptions& options) {
    check_points(points, k);
    std::mt19937_64 rng(seed);
    const std::size_t n = points.size(), dim = points.front().size();

    KMeansResult r;
    r.centroids = plus_plus_seeds(points, k, rng);
    r.assignments.assign(n, 0);
    r.inertia = assign(points, r.centroids, r.assignments);
    r.inertia_trace.push_back(r.inertia);

    for (r.iterations = 1; r.iterations <= options.max_iter; ++r.iterations) {
        std::vector<Point> next(k, Point(dim, 0.0));
        std::vector<long> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int c = r.assignments[i];
            ++sizes[c];
            for (std::size_t d = 0; d < dim; ++d)
                next[c][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[c] == 0)
                continue;
            for (double& v : next[c])
                v /= static_cast<double>(sizes[c]);
        }
        // Empty clusters take the point farthest from its current centroid.
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0)
                continue;
            std::size_t far = 0;
            double far_d = -1;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = squared_distance(points[i], next[r.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            next[c] = points[far];
            r.assignments[far] = c;
        }

        double shift = 0;
        for (int c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_distance(next[c], r.centroids[c])));
        r.centroids = std::move(next);
        r.inertia = assign(points, r.centroids, r.assignments);
        r.inertia_trace.push_back(r.inertia);
        if (shift < options.tol)
            break;
    }
    r.iterations = std::min(r.iterations, options.max_iter);
    return r;
}

std::uint64_t kmeans_restart_seed(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

KMeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed, const KMeansOptions& options) {
    check_points(points, k);
    if (options.restarts < 1)
        throw std::invalid_argument("kmeans: restarts must be positive");
    KMeansResult best;
    for (int r = 0; r < options.restarts; ++r) {
        KMeansResult run = kmeans_single(points, k, kmeans_restart_seed(seed, r), options);
        if (r == 0 || run.inertia < best.inertia)
            best = std::move(run);
    }
    return best;
}

ContingencyTable contingency(std::span<const int> u, std::span<const int> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("contingency: label sequences differ in length");
    if (u.empty())
        throw std::invalid_argument("contingency: empty labelings");
    std::map<int, int> ru, rv;
    for (int x : u)
        ru.emplace(x, 0);
    for (int x : v)
        rv.emplace(x, 0);
    int idx = 0;
    for (auto& kv : ru)
        kv.second = idx++;
    idx = 0;
    for (auto& kv : rv)
        kv.second = idx++;

    ContingencyTable t;
    t.rows = static_cast<int>(ru.size());
    t.cols = static_cast<int>(rv.size());
    t.counts.assign(static_cast<std::size_t>(t.rows) * t.cols, 0);
    t.row_sums.assign(t.rows, 0);
    t.col_sums.assign(t.cols, 0);
    for (std::size_t s = 0; s < u.size(); ++s) {
        const int i = ru[u[s]], j = rv[v[s]];
        ++t.counts[static_cast<std::size_t>(i) * t.cols + j];
        ++t.row_sums[i];
        ++t.col_sums[j];
    }
    t.total = static_cast<long>(u.size());
    return t;
}

namespace {

// Sums in ascending order so that results do not depend on the order in
// which rows and columns were visited.
double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms)
        s += t;
    return s;
}

double entropy_of_counts(std::span<const long> counts, long total) {
    std::vector<double> terms;
    const double n = static_cast<double>(total);
    for (long c : counts)
        if (c > 0)
            terms.push_back(static_cast<double>(c) / n * std::log(n / static_cast<double>(c)));
    return ordered_sum(terms);
}

bool identical_partitions(const ContingencyTable& t) {
    if (t.rows != t.cols)
        return false;
    for (int i = 0; i < t.rows; ++i) {
        int nonzero = 0;
        for (int j = 0; j < t.cols; ++j)
            nonzero += t.at(i, j) > 0;
        if (nonzero != 1)
            return false;
    }
    return true;
}

}  // namespace

double mutual_info(const ContingencyTable& t) {
    if (t.total < 1)
        throw std::invalid_argument("mutual_info: empty table");
    const double n = static_cast<double>(t.total);
    std::vector<double> terms;
    for (int i = 0; i < t.rows; ++i)
        for (int j = 0; j < t.cols; ++j) {
            const long c = t.at(i, j);
            if (c == 0)
                continue;
            const double cell = static_cast<double>(c);
            const double ab = static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j]);
            terms.push_back(cell / n * std::log(n * cell / ab));
        }
    return std::max(0.0, ordered_sum(terms));
}

double entropy(std::span<const int> labels) {
    if (labels.empty())
        throw std::invalid_argument("entropy: empty labeling");
    std::map<int, long> counts;
    for (int x : labels)
        ++counts[x];
    std::vector<long> c;
    for (const auto& kv : counts)
        c.push_back(kv.second);
    return entropy_of_counts(c, static_cast<long>(labels.size()));
}

double expected_mi(const ContingencyTable& t) {
    if (t.total < 1)
        throw std::invalid_argument("expected_mi: empty table");
    const long N = t.total;
    const double n = static_cast<double>(N);
    const double lg_n = std::lgamma(n + 1.0);
    auto lg = [](long x) { return std::lgamma(static_cast<double>(x) + 1.0); };

    std::vector<double> terms;
    for (long a : t.row_sums) {
        for (long b : t.col_sums) {
            // Written so that swapping a and b yields bit-identical terms.
            const double fixed = (lg(a) + lg(b)) + (lg(N - a) + lg(N - b)) - lg_n;
            const double ab = static_cast<double>(a) * static_cast<double>(b);
            for (long m = std::max(1L, a + b - N); m <= std::min(a, b); ++m) {
                const double log_p = fixed - lg(m) - (lg(a - m) + lg(b - m)) - lg(N - a - b + m);
                const double md = static_cast<double>(m);
                terms.push_back(md / n * std::log(n * md / ab) * std::exp(log_p));
            }
        }
    }
    return ordered_sum(terms);
}

double ami(std::span<const int> u, std::span<const int> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("ami: label sequences differ in length");
    if (u.size() < 2)
        throw std::invalid_argument("ami: need at least two samples");
    const ContingencyTable t = contingency(u, v);
    if (identical_partitions(t))
        return 1.0;
    const double mi = mutual_info(t);
    const double emi = expected_mi(t);
    const double h = std::max(entropy_of_counts(t.row_sums, t.total), entropy_of_counts(t.col_sums, t.total));
    const double denom = h - emi;
    if (std::abs(denom) < 1e-12)
        return 0.0;
    return (mi - emi) / denom;
}

}  // namespace moist
