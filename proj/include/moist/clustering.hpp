#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace moist {

using Point = std::vector<double>;

struct KMeansOptions {
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-4;  // stop once no centroid moves farther than this
};

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<Point> centroids;
    double inertia = 0;
    int iterations = 0;
    /// Inertia after every assignment step of the winning restart.
    std::vector<double> inertia_trace;
};

/// One k-means++ seeded Lloyd run.
KMeansResult kmeans_single(const std::vector<Point>& points, int k, std::uint64_t seed,
                           const KMeansOptions& options = {});

/// Seed used for restart `restart` of kmeans(points, k, seed).
std::uint64_t kmeans_restart_seed(std::uint64_t seed, int restart);

/// Best of `options.restarts` runs by (inertia, restart index).
KMeansResult kmeans(const std::vector<Point>& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

double squared_distance(std::span<const double> a, std::span<const double> b);

struct ContingencyTable {
    int rows = 0;
    int cols = 0;
    std::vector<long> counts;  // rows x cols, row-major
    std::vector<long> row_sums;
    std::vector<long> col_sums;
    long total = 0;

    long at(int i, int j) const { return counts[static_cast<std::size_t>(i) * cols + j]; }
};

/// Rows index the distinct values of u, columns those of v, both in
/// ascending label order.
ContingencyTable contingency(std::span<const int> u, std::span<const int> v);

/// Natural-log mutual information of a contingency table.
double mutual_info(const ContingencyTable& t);

/// Natural-log entropy of a labeling.
double entropy(std::span<const int> labels);

/// Expected mutual information under the hypergeometric permutation model.
double expected_mi(const ContingencyTable& t);

/// Adjusted mutual information with the max(H(U), H(V)) normalizer.
double ami(std::span<const int> u, std::span<const int> v);

}  // namespace moist
