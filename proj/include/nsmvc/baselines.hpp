#pragma once

#include <cstdint>
#include <vector>

#include "nsmvc/dataset.hpp"
#include "nsmvc/solver.hpp"

namespace nsmvc {

struct KMeansConfig {
    int k = 2;
    int max_iters = 100;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    InitMode init = InitMode::random_assignment;
    bool record_assignments = false;
};

struct KMeansResult {
    std::vector<int> assignments;
    Matrix centroids;                     // d x k
    std::vector<double> inertia_history;  // [0] = initial, then one per iteration
    std::vector<std::vector<int>> assignment_snapshots;
};

// Lloyd iterations with the same initialization, tie-breaking and stopping
// discipline as the solver, written as an independent code path.
KMeansResult kmeans(const ViewMatrix& data, const KMeansConfig& config);

// KM(v): one independent k-means run per view, each from config.seed.
std::vector<KMeansResult> kmeans_per_view(const MultiViewDataset& ds, const KMeansConfig& config);

// KM(All): k-means on the stacked view representation.
KMeansResult kmeans_concat(const MultiViewDataset& ds, const KMeansConfig& config);

}  // namespace nsmvc
