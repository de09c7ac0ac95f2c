#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nsmvc {

// Pacing parameters: start point alpha, total rounds T, per-round step beta.
// beta is derived so the pace reaches full selection exactly at round T.
struct SplSchedule {
    double alpha = 0.5;
    int total_rounds = 1;
    double beta = 0.0;

    static SplSchedule make(double alpha, int total_rounds);
};

// Per-view self-paced state for one outer round.
struct ViewPace {
    double lambda = 0.0;
    std::vector<std::uint8_t> weights;  // binary selection flags, one per sample
    double eta = 1.0;
    int selected_count = 0;
};

// (1 - alpha) / (T - 1); zero for the degenerate single-round schedule.
double compute_beta(double alpha, int total_rounds);

// Pace threshold for round t (1-based): min(l) + (alpha + (t-1)*beta) * range.
// The final round returns max(l) so every sample is admitted.
double compute_lambda(std::span<const double> losses, const SplSchedule& schedule, int round);

// w_i = 1 iff losses[i] <= lambda (inclusive threshold).
std::vector<std::uint8_t> selection_weights(std::span<const double> losses, double lambda);

// eta(v) = min_u lambda_u / lambda_v, each in (0,1]. Zero lambdas are floored
// at 1e-12 so a zero-loss view keeps exponent 1 when it is the minimum.
std::vector<double> compute_exponents(std::span<const double> lambdas);

// lambda, weights and selected count for one view; eta is filled by the
// caller once every view's lambda is known.
ViewPace make_view_pace(std::span<const double> losses, const SplSchedule& schedule, int round);

}  // namespace nsmvc
