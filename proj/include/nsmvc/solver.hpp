#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nsmvc/dataset.hpp"
#include "nsmvc/spl.hpp"

namespace nsmvc {

enum class InitMode { random_assignment, forgy };

const char* to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& token);

struct SolverConfig {
    int k = 2;
    SplSchedule schedule;
    int inner_max_iters = 100;
    double inner_rel_tol = 1e-6;
    std::uint64_t seed = 0;
    InitMode init = InitMode::random_assignment;
    bool record_assignments = false;  // keep per-iteration assignment snapshots
};

// Per-view centroids plus the shared assignment vector (dense one-hot form).
struct ClusterModel {
    std::vector<Matrix> centroids;  // one d^v x k matrix per view
    std::vector<int> assignments;   // n entries in [0, k)
    int k = 0;
};

struct InnerStep {
    double after_centroids = 0.0;
    double after_assignments = 0.0;
};

struct OuterRoundTrace {
    std::vector<double> lambdas;
    std::vector<double> etas;
    std::vector<int> selected;
    double initial_objective = 0.0;
    std::vector<InnerStep> inner;
    std::vector<std::vector<int>> assignment_snapshots;  // only with record_assignments
    double seconds = 0.0;
};

struct ConvergenceTrace {
    InitMode init = InitMode::random_assignment;
    std::vector<OuterRoundTrace> rounds;
};

// Squared Euclidean distance between a sample and a centroid.
double sample_loss(std::span<const double> x, std::span<const double> centroid);

// Masked per-view loss: sum of selected samples' losses.
double view_loss(std::span<const double> losses, std::span<const std::uint8_t> weights);

// Fused objective: sum over views of phi^eta, with 0^eta defined as 0.
double objective(std::span<const double> phis, std::span<const double> etas);

// Per-sample squared distance to the assigned centroid, one vector per view.
std::vector<std::vector<double>> assigned_losses(const ClusterModel& model,
                                                 const MultiViewDataset& ds);

// Masked per-view losses of the current model state.
std::vector<double> compute_phis(const ClusterModel& model, const MultiViewDataset& ds,
                                 std::span<const ViewPace> paces);

// Closed-form per-view centroid update under binary weights: each cluster
// with at least one selected member becomes the mean of those members;
// the rest keep their previous column.
Matrix update_centroids(const ViewMatrix& view, std::span<const int> assignments,
                        std::span<const std::uint8_t> weights, int k, const Matrix& previous);

// Sequential per-sample assignment search. Every sample is revisited in
// ascending index order and moved to the cluster minimizing the fused
// objective given the running per-view losses. Returns the per-view losses
// of the updated state.
std::vector<double> update_assignments(ClusterModel& model, const MultiViewDataset& ds,
                                       std::span<const ViewPace> paces);

struct InnerResult {
    double initial_objective = 0.0;
    std::vector<InnerStep> steps;
    std::vector<std::vector<int>> assignment_snapshots;
};

// Alternates centroid and assignment updates at fixed selection/exponents
// until the relative objective change drops below inner_rel_tol or
// inner_max_iters is reached.
InnerResult inner_solve(ClusterModel& model, const MultiViewDataset& ds,
                        std::span<const ViewPace> paces, const SolverConfig& config);

namespace detail {

struct InitState {
    std::vector<int> assignments;
    std::vector<Matrix> centroids;  // one per view
};

// Shared initialization used by both the solver and the k-means baselines so
// comparisons from a common seed isolate the algorithm, not the start point.
InitState init_state(std::span<const Matrix* const> views, int k, InitMode mode,
                     std::mt19937_64& rng);

}  // namespace detail

ClusterModel init_model(const MultiViewDataset& ds, int k, InitMode mode, std::mt19937_64& rng);

struct FitResult {
    ClusterModel model;
    ConvergenceTrace trace;
};

// The full self-paced loop: T outer rounds of pace refresh + inner solve.
FitResult fit(const MultiViewDataset& ds, const SolverConfig& config);

}  // namespace nsmvc
