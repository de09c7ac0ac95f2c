#include "nsmvc/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nsmvc {

namespace {

double squared_distance(std::span<const double> x, std::span<const double> c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double d = x[t] - c[t];
        acc += d * d;
    }
    return acc;
}

double relative_change(double previous, double current) {
    return std::abs(previous - current) / std::max(std::abs(previous), 1e-300);
}

void check_model(const ClusterModel& model, const MultiViewDataset& ds,
                 std::span<const ViewPace> paces) {
    if (model.k < 1) throw std::invalid_argument("model has k < 1");
    if (model.centroids.size() != ds.views.size() || paces.size() != ds.views.size())
        throw std::invalid_argument("model/paces view count does not match the dataset");
    if (model.assignments.size() != ds.n)
        throw std::invalid_argument("assignment vector length does not match the dataset");
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        if (model.centroids[v].rows() != ds.views[v].dim() ||
            model.centroids[v].cols() != static_cast<std::size_t>(model.k))
            throw std::invalid_argument("centroid matrix shape mismatch in view '" +
                                        ds.views[v].name + "'");
        if (paces[v].weights.size() != ds.n)
            throw std::invalid_argument("selection weights length mismatch in view '" +
                                        ds.views[v].name + "'");
    }
}

}  // namespace

const char* to_string(InitMode mode) {
    return mode == InitMode::forgy ? "forgy" : "random_assignment";
}

InitMode init_mode_from_string(const std::string& token) {
    if (token == "random_assignment") return InitMode::random_assignment;
    if (token == "forgy") return InitMode::forgy;
    throw std::invalid_argument("unknown init mode '" + token +
                                "' (expected random_assignment|forgy)");
}

double sample_loss(std::span<const double> x, std::span<const double> centroid) {
    if (x.size() != centroid.size())
        throw std::invalid_argument("sample_loss: dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(centroid.size()) + ")");
    return squared_distance(x, centroid);
}

double view_loss(std::span<const double> losses, std::span<const std::uint8_t> weights) {
    if (losses.size() != weights.size())
        throw std::invalid_argument("view_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < losses.size(); ++i)
        if (weights[i]) acc += losses[i];
    return acc;
}

double objective(std::span<const double> phis, std::span<const double> etas) {
    if (phis.size() != etas.size())
        throw std::invalid_argument("objective: phi/eta length mismatch");
    double acc = 0.0;
    for (std::size_t v = 0; v < phis.size(); ++v) {
        const double e = etas[v];
        if (!(e > 0.0 && e <= 1.0))
            throw std::invalid_argument("objective: exponent outside (0,1] at view " +
                                        std::to_string(v));
        const double p = phis[v];
        if (p == 0.0) continue;          // 0^eta := 0
        acc += e == 1.0 ? p : std::pow(p, e);
    }
    return acc;
}

std::vector<std::vector<double>> assigned_losses(const ClusterModel& model,
                                                 const MultiViewDataset& ds) {
    std::vector<std::vector<double>> losses(ds.views.size());
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        losses[v].resize(ds.n);
        const auto& view = ds.views[v];
        const auto& centroids = model.centroids[v];
        for (std::size_t i = 0; i < ds.n; ++i)
            losses[v][i] = squared_distance(view.data.col(i),
                                            centroids.col(model.assignments[i]));
    }
    return losses;
}

std::vector<double> compute_phis(const ClusterModel& model, const MultiViewDataset& ds,
                                 std::span<const ViewPace> paces) {
    std::vector<double> phis(ds.views.size(), 0.0);
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const auto& view = ds.views[v];
        const auto& centroids = model.centroids[v];
        const auto& weights = paces[v].weights;
        double acc = 0.0;
        for (std::size_t i = 0; i < ds.n; ++i)
            if (weights[i])
                acc += squared_distance(view.data.col(i), centroids.col(model.assignments[i]));
        phis[v] = acc;
    }
    return phis;
}

Matrix update_centroids(const ViewMatrix& view, std::span<const int> assignments,
                        std::span<const std::uint8_t> weights, int k, const Matrix& previous) {
    if (k < 1) throw std::invalid_argument("update_centroids: k must be >= 1");
    const std::size_t n = view.samples();
    const std::size_t d = view.dim();
    if (assignments.size() != n || weights.size() != n)
        throw std::invalid_argument("update_centroids: assignments/weights length mismatch");
    if (previous.rows() != d || previous.cols() != static_cast<std::size_t>(k))
        throw std::invalid_argument("update_centroids: previous centroid shape mismatch");

    Matrix sums(d, static_cast<std::size_t>(k));
    std::vector<long long> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!weights[i]) continue;
        const int j = assignments[i];
        ++counts[j];
        const auto x = view.data.col(i);
        auto s = sums.col(j);
        for (std::size_t f = 0; f < d; ++f) s[f] += x[f];
    }

    Matrix out = previous;  // clusters with no selected member keep their column
    for (int j = 0; j < k; ++j) {
        if (counts[j] == 0) continue;
        const double inv = 1.0 / static_cast<double>(counts[j]);
        auto s = sums.col(j);
        auto o = out.col(j);
        for (std::size_t f = 0; f < d; ++f) o[f] = s[f] * inv;
    }
    return out;
}

std::vector<double> update_assignments(ClusterModel& model, const MultiViewDataset& ds,
                                       std::span<const ViewPace> paces) {
    check_model(model, ds, paces);
    const std::size_t n = ds.n;
    const std::size_t m = ds.views.size();
    const int k = model.k;

    std::vector<double> etas(m);
    bool all_linear = true;
    for (std::size_t v = 0; v < m; ++v) {
        etas[v] = paces[v].eta;
        if (!(etas[v] > 0.0 && etas[v] <= 1.0))
            throw std::invalid_argument("update_assignments: exponent outside (0,1]");
        all_linear = all_linear && etas[v] == 1.0;
    }

    // Running per-view losses of the current state; refreshed from scratch so
    // the pass starts drift-free.
    std::vector<double> phis = compute_phis(model, ds, paces);
    std::vector<double> next_phis(m, 0.0);  // clean left-to-right sum of the final state

    std::vector<double> local(m * static_cast<std::size_t>(k));  // l_ij per view/cluster
    std::vector<double> candidate(static_cast<std::size_t>(k));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < m; ++v) {
            const auto x = ds.views[v].data.col(i);
            const auto& centroids = model.centroids[v];
            for (int j = 0; j < k; ++j)
                local[v * k + j] = squared_distance(x, centroids.col(j));
        }
        const int prev = model.assignments[i];

        if (all_linear) {
            // With every exponent 1 the removed contribution cancels across
            // candidates; compare the selected local losses directly.
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (std::size_t v = 0; v < m; ++v)
                    if (paces[v].weights[i]) acc += local[v * k + j];
                candidate[j] = acc;
            }
        } else {
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (std::size_t v = 0; v < m; ++v) {
                    const bool selected = paces[v].weights[i] != 0;
                    const double theta =
                        phis[v] - (selected ? local[v * k + prev] : 0.0);
                    double base = theta + (selected ? local[v * k + j] : 0.0);
                    if (base < 0.0) base = 0.0;  // cancellation noise near zero
                    acc += base == 0.0 ? 0.0
                                       : (etas[v] == 1.0 ? base : std::pow(base, etas[v]));
                }
                candidate[j] = acc;
            }
        }

        // Previous assignment wins exact ties; otherwise the lowest index.
        int best = prev;
        double best_value = candidate[prev];
        for (int j = 0; j < k; ++j) {
            if (candidate[j] < best_value) {
                best = j;
                best_value = candidate[j];
            }
        }

        model.assignments[i] = best;
        for (std::size_t v = 0; v < m; ++v) {
            if (!paces[v].weights[i]) continue;
            phis[v] += local[v * k + best] - local[v * k + prev];
            next_phis[v] += local[v * k + best];
        }
    }
    return next_phis;
}

InnerResult inner_solve(ClusterModel& model, const MultiViewDataset& ds,
                        std::span<const ViewPace> paces, const SolverConfig& config) {
    check_model(model, ds, paces);
    if (config.inner_max_iters < 1)
        throw std::invalid_argument("inner_solve: inner_max_iters must be >= 1");
    if (!(config.inner_rel_tol > 0.0))
        throw std::invalid_argument("inner_solve: inner_rel_tol must be > 0");

    const std::size_t m = ds.views.size();
    std::vector<double> etas(m);
    for (std::size_t v = 0; v < m; ++v) etas[v] = paces[v].eta;

    InnerResult result;
    std::vector<double> phis = compute_phis(model, ds, paces);
    result.initial_objective = objective(phis, etas);
    if (config.record_assignments) result.assignment_snapshots.push_back(model.assignments);

    double previous = result.initial_objective;
    for (int it = 0; it < config.inner_max_iters; ++it) {
        for (std::size_t v = 0; v < m; ++v)
            model.centroids[v] = update_centroids(ds.views[v], model.assignments,
                                                  paces[v].weights, model.k, model.centroids[v]);
        phis = compute_phis(model, ds, paces);
        const double after_centroids = objective(phis, etas);
        assert(after_centroids <= previous * (1.0 + 1e-9) + 1e-15);

        phis = update_assignments(model, ds, paces);
        const double after_assignments = objective(phis, etas);
        assert(after_assignments <= after_centroids * (1.0 + 1e-9) + 1e-15);

        result.steps.push_back({after_centroids, after_assignments});
        if (config.record_assignments) result.assignment_snapshots.push_back(model.assignments);

        const double rel = relative_change(previous, after_assignments);
        previous = after_assignments;
        if (rel < config.inner_rel_tol) break;
    }
    return result;
}

namespace detail {

InitState init_state(std::span<const Matrix* const> views, int k, InitMode mode,
                     std::mt19937_64& rng) {
    if (views.empty()) throw std::invalid_argument("init_state: no views");
    const std::size_t n = views[0]->cols();
    for (const Matrix* m : views)
        if (m->cols() != n) throw std::invalid_argument("init_state: sample count mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("init_state: need 1 <= k <= n, got k=" + std::to_string(k) +
                                    ", n=" + std::to_string(n));

    InitState state;
    state.centroids.reserve(views.size());

    auto sample_distinct = [&](int count, std::vector<std::size_t> exclude) {
        std::vector<std::size_t> picks;
        picks.reserve(count);
        while (static_cast<int>(picks.size()) < count) {
            const std::size_t cand = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            if (std::find(exclude.begin(), exclude.end(), cand) != exclude.end()) continue;
            exclude.push_back(cand);
            picks.push_back(cand);
        }
        return picks;
    };

    if (mode == InitMode::random_assignment) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        state.assignments.resize(n);
        for (auto& a : state.assignments) a = pick(rng);

        std::vector<long long> counts(static_cast<std::size_t>(k), 0);
        for (int a : state.assignments) ++counts[a];
        std::vector<int> empties;
        for (int j = 0; j < k; ++j)
            if (counts[j] == 0) empties.push_back(j);
        // Clusters the random draw left empty borrow a distinct sample's
        // coordinates (in every view) as their starting centroid.
        const auto fallback = sample_distinct(static_cast<int>(empties.size()), {});

        for (const Matrix* view : views) {
            const std::size_t d = view->rows();
            Matrix centroids(d, static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < n; ++i) {
                const auto x = view->col(i);
                auto c = centroids.col(state.assignments[i]);
                for (std::size_t f = 0; f < d; ++f) c[f] += x[f];
            }
            for (int j = 0; j < k; ++j) {
                if (counts[j] == 0) continue;
                const double inv = 1.0 / static_cast<double>(counts[j]);
                auto c = centroids.col(j);
                for (std::size_t f = 0; f < d; ++f) c[f] *= inv;
            }
            for (std::size_t e = 0; e < empties.size(); ++e) {
                const auto x = view->col(fallback[e]);
                auto c = centroids.col(empties[e]);
                std::copy(x.begin(), x.end(), c.begin());
            }
            state.centroids.push_back(std::move(centroids));
        }
    } else {
        const auto picks = sample_distinct(k, {});
        for (const Matrix* view : views) {
            const std::size_t d = view->rows();
            Matrix centroids(d, static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                const auto x = view->col(picks[j]);
                auto c = centroids.col(j);
                std::copy(x.begin(), x.end(), c.begin());
            }
            state.centroids.push_back(std::move(centroids));
        }
        // Nearest centroid by summed squared distance across views.
        state.assignments.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_value = 0.0;
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (std::size_t v = 0; v < views.size(); ++v)
                    acc += squared_distance(views[v]->col(i), state.centroids[v].col(j));
                if (j == 0 || acc < best_value) {
                    best = j;
                    best_value = acc;
                }
            }
            state.assignments[i] = best;
        }
    }
    return state;
}

}  // namespace detail

ClusterModel init_model(const MultiViewDataset& ds, int k, InitMode mode, std::mt19937_64& rng) {
    std::vector<const Matrix*> views;
    views.reserve(ds.views.size());
    for (const auto& view : ds.views) views.push_back(&view.data);
    auto state = detail::init_state(views, k, mode, rng);
    return ClusterModel{std::move(state.centroids), std::move(state.assignments), k};
}

FitResult fit(const MultiViewDataset& ds, const SolverConfig& config) {
    ds.validate();
    if (config.k < 1) throw std::invalid_argument("fit: k must be >= 1");
    if (static_cast<std::size_t>(config.k) > ds.n)
        throw std::invalid_argument("fit: k=" + std::to_string(config.k) + " exceeds n=" +
                                    std::to_string(ds.n));
    const SplSchedule& schedule = config.schedule;
    if (schedule.total_rounds < 1)
        throw std::invalid_argument("fit: schedule needs total_rounds >= 1");
    if (schedule.beta != compute_beta(schedule.alpha, schedule.total_rounds))
        throw std::invalid_argument("fit: schedule beta is inconsistent with alpha and T");

    const std::size_t m = ds.views.size();
    std::mt19937_64 rng(config.seed);

    FitResult result;
    result.model = init_model(ds, config.k, config.init, rng);
    result.trace.init = config.init;

    for (int round = 1; round <= schedule.total_rounds; ++round) {
        const auto start = std::chrono::steady_clock::now();

        // Step 1: refresh the pace from the current model's losses.
        const auto losses = assigned_losses(result.model, ds);
        std::vector<ViewPace> paces(m);
        std::vector<double> lambdas(m);
        for (std::size_t v = 0; v < m; ++v) {
            paces[v] = make_view_pace(losses[v], schedule, round);
            lambdas[v] = paces[v].lambda;
        }
        const auto etas = compute_exponents(lambdas);
        for (std::size_t v = 0; v < m; ++v) paces[v].eta = etas[v];

        // Step 2: alternate centroid and assignment updates.
        auto inner = inner_solve(result.model, ds, paces, config);

        OuterRoundTrace trace;
        trace.lambdas = std::move(lambdas);
        trace.etas = etas;
        trace.selected.resize(m);
        for (std::size_t v = 0; v < m; ++v) trace.selected[v] = paces[v].selected_count;
        trace.initial_objective = inner.initial_objective;
        trace.inner = std::move(inner.steps);
        trace.assignment_snapshots = std::move(inner.assignment_snapshots);
        trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.trace.rounds.push_back(std::move(trace));
    }
    return result;
}

}  // namespace nsmvc
