#include "nsmvc/baselines.hpp"

#include <cassert>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsmvc {

namespace {

double dist_sq(std::span<const double> x, std::span<const double> c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double d = x[t] - c[t];
        acc += d * d;
    }
    return acc;
}

double inertia_of(const Matrix& data, const std::vector<int>& assignments,
                  const Matrix& centroids) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.cols(); ++i)
        acc += dist_sq(data.col(i), centroids.col(assignments[i]));
    return acc;
}

}  // namespace

KMeansResult kmeans(const ViewMatrix& data, const KMeansConfig& config) {
    const std::size_t n = data.samples();
    const std::size_t d = data.dim();
    if (config.k < 1 || static_cast<std::size_t>(config.k) > n)
        throw std::invalid_argument("kmeans: need 1 <= k <= n, got k=" +
                                    std::to_string(config.k) + ", n=" + std::to_string(n));
    if (config.max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be >= 1");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("kmeans: rel_tol must be > 0");
    const int k = config.k;

    std::mt19937_64 rng(config.seed);
    const Matrix* view_ptr = &data.data;
    auto init = detail::init_state({&view_ptr, 1}, k, config.init, rng);

    KMeansResult result;
    result.assignments = std::move(init.assignments);
    result.centroids = std::move(init.centroids[0]);

    double previous = inertia_of(data.data, result.assignments, result.centroids);
    result.inertia_history.push_back(previous);
    if (config.record_assignments) result.assignment_snapshots.push_back(result.assignments);

    std::vector<double> distances(static_cast<std::size_t>(k));
    for (int it = 0; it < config.max_iters; ++it) {
        // Centroid step: per-cluster means; empty clusters keep their column.
        Matrix sums(d, static_cast<std::size_t>(k));
        std::vector<long long> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int j = result.assignments[i];
            ++counts[j];
            const auto x = data.data.col(i);
            auto s = sums.col(j);
            for (std::size_t f = 0; f < d; ++f) s[f] += x[f];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[j]);
            auto s = sums.col(j);
            auto c = result.centroids.col(j);
            for (std::size_t f = 0; f < d; ++f) c[f] = s[f] * inv;
        }

        // Assignment step: nearest centroid; the previous assignment wins
        // exact ties, otherwise the lowest index.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = data.data.col(i);
            for (int j = 0; j < k; ++j) distances[j] = dist_sq(x, result.centroids.col(j));
            int best = result.assignments[i];
            double best_value = distances[best];
            for (int j = 0; j < k; ++j) {
                if (distances[j] < best_value) {
                    best = j;
                    best_value = distances[j];
                }
            }
            result.assignments[i] = best;
            inertia += best_value;
        }

        result.inertia_history.push_back(inertia);
        if (config.record_assignments) result.assignment_snapshots.push_back(result.assignments);

        const double rel = std::abs(previous - inertia) / std::max(std::abs(previous), 1e-300);
        previous = inertia;
        if (rel < config.rel_tol) break;
    }
    return result;
}

std::vector<KMeansResult> kmeans_per_view(const MultiViewDataset& ds, const KMeansConfig& config) {
    ds.validate();
    std::vector<KMeansResult> results;
    results.reserve(ds.views.size());
    for (const auto& view : ds.views) results.push_back(kmeans(view, config));
    return results;
}

KMeansResult kmeans_concat(const MultiViewDataset& ds, const KMeansConfig& config) {
    return kmeans(concatenate_views(ds), config);
}

}  // namespace nsmvc
