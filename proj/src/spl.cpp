#include "nsmvc/spl.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nsmvc {

double compute_beta(double alpha, int total_rounds) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("compute_beta: alpha must lie in [0,1], got " +
                                    std::to_string(alpha));
    if (total_rounds < 1)
        throw std::invalid_argument("compute_beta: total_rounds must be >= 1, got " +
                                    std::to_string(total_rounds));
    if (total_rounds == 1) return 0.0;  // degenerate schedule: single full-selection round
    return (1.0 - alpha) / static_cast<double>(total_rounds - 1);
}

SplSchedule SplSchedule::make(double alpha, int total_rounds) {
    return SplSchedule{alpha, total_rounds, compute_beta(alpha, total_rounds)};
}

double compute_lambda(std::span<const double> losses, const SplSchedule& schedule, int round) {
    if (losses.empty()) throw std::invalid_argument("compute_lambda: empty loss vector");
    if (round < 1 || round > schedule.total_rounds)
        throw std::out_of_range("compute_lambda: round " + std::to_string(round) +
                                " outside [1," + std::to_string(schedule.total_rounds) + "]");
    const auto [lo_it, hi_it] = std::minmax_element(losses.begin(), losses.end());
    // The last round must admit every sample; return max(l) directly instead
    // of trusting alpha + (T-1)*beta to round to exactly 1.
    if (round == schedule.total_rounds) return *hi_it;
    const double pace = schedule.alpha + (round - 1) * schedule.beta;
    return *lo_it + pace * (*hi_it - *lo_it);
}

std::vector<std::uint8_t> selection_weights(std::span<const double> losses, double lambda) {
    if (lambda < 0.0)
        throw std::invalid_argument("selection_weights: lambda must be >= 0, got " +
                                    std::to_string(lambda));
    std::vector<std::uint8_t> weights(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses[i] < 0.0)
            throw std::invalid_argument("selection_weights: negative loss at index " +
                                        std::to_string(i));
        weights[i] = losses[i] <= lambda ? 1 : 0;
    }
    return weights;
}

std::vector<double> compute_exponents(std::span<const double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("compute_exponents: empty lambda vector");
    // A zero lambda means every loss in that view is zero; flooring it keeps
    // the ratio defined and grants the perfect view exponent 1.
    constexpr double kZeroLambdaFloor = 1e-12;
    std::vector<double> adjusted(lambdas.begin(), lambdas.end());
    for (double& l : adjusted)
        if (l < kZeroLambdaFloor) l = kZeroLambdaFloor;
    const double lo = *std::min_element(adjusted.begin(), adjusted.end());
    std::vector<double> etas(adjusted.size());
    for (std::size_t v = 0; v < adjusted.size(); ++v) etas[v] = lo / adjusted[v];
    return etas;
}

ViewPace make_view_pace(std::span<const double> losses, const SplSchedule& schedule, int round) {
    ViewPace pace;
    pace.lambda = compute_lambda(losses, schedule, round);
    pace.weights = selection_weights(losses, pace.lambda);
    pace.selected_count = 0;
    for (std::uint8_t w : pace.weights) pace.selected_count += w;
    return pace;
}

}  // namespace nsmvc
