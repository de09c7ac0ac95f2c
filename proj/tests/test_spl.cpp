#include <doctest.h>

#include <random>
#include <vector>

#include "nsmvc/spl.hpp"
#include "oracles.hpp"

using namespace nsmvc;

TEST_CASE("compute_beta matches the worked schedule") {
    CHECK(compute_beta(0.5, 6) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(compute_beta(1.0, 4) == 0.0);
    CHECK(compute_beta(0.3, 8) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(compute_beta(0.0, 2) == 1.0);
}

TEST_CASE("compute_beta rejects bad parameters") {
    CHECK_THROWS_AS(compute_beta(-0.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(compute_beta(1.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(compute_beta(0.5, 0), std::invalid_argument);
}

TEST_CASE("compute_beta degenerate single-round schedule") {
    CHECK(compute_beta(0.3, 1) == 0.0);
    const auto schedule = SplSchedule::make(0.3, 1);
    const std::vector<double> losses{1.0, 4.0, 2.5};
    CHECK(compute_lambda(losses, schedule, 1) == 4.0);  // forced full selection
}

TEST_CASE("compute_lambda walks from the pace start to the max loss") {
    const auto schedule = SplSchedule::make(0.5, 6);
    const std::vector<double> losses{0.0, 3.0, 7.0, 10.0};
    CHECK(compute_lambda(losses, schedule, 1) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(compute_lambda(losses, schedule, 6) == 10.0);

    const std::vector<double> flat{3.5, 3.5, 3.5};
    for (int t = 1; t <= 6; ++t) CHECK(compute_lambda(flat, schedule, t) == 3.5);
}

TEST_CASE("compute_lambda rejects bad input") {
    const auto schedule = SplSchedule::make(0.5, 6);
    CHECK_THROWS_AS(compute_lambda({}, schedule, 1), std::invalid_argument);
    const std::vector<double> losses{1.0};
    CHECK_THROWS_AS(compute_lambda(losses, schedule, 0), std::out_of_range);
    CHECK_THROWS_AS(compute_lambda(losses, schedule, 7), std::out_of_range);
}

TEST_CASE("selection_weights uses an inclusive threshold") {
    const std::vector<double> losses{1.0, 2.0, 3.0};
    CHECK(selection_weights(losses, 2.0) == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(selection_weights(losses, 3.0) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(selection_weights(losses, 0.0) == std::vector<std::uint8_t>{0, 0, 0});
    CHECK_THROWS_AS(selection_weights(std::vector<double>{-1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(selection_weights(losses, -0.5), std::invalid_argument);
}

TEST_CASE("compute_exponents is the min-lambda ratio") {
    const std::vector<double> lambdas{2.0, 4.0, 8.0};
    const auto etas = compute_exponents(lambdas);
    CHECK(etas == std::vector<double>{1.0, 0.5, 0.25});

    CHECK(compute_exponents(std::vector<double>{7.0, 7.0, 7.0}) ==
          std::vector<double>{1.0, 1.0, 1.0});
    CHECK(compute_exponents(std::vector<double>{3.0, 6.0}) == std::vector<double>{1.0, 0.5});
    CHECK_THROWS_AS(compute_exponents({}), std::invalid_argument);
}

TEST_CASE("compute_exponents floors zero lambdas") {
    const auto etas = compute_exponents(std::vector<double>{0.0, 5.0});
    CHECK(etas[0] == 1.0);  // the zero-loss view is the minimum
    CHECK(etas[1] > 0.0);
    CHECK(etas[1] <= 1.0);
}

namespace {

std::vector<double> random_losses(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> u(0.0, scale);
    std::vector<double> losses(n);
    for (auto& l : losses) l = u(rng);
    return losses;
}

}  // namespace

TEST_CASE("property: round T always selects every sample") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> t_dist(1, 9);
    std::uniform_real_distribution<double> a_dist(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int total_rounds = t_dist(rng);
        const auto schedule = SplSchedule::make(a_dist(rng), total_rounds);
        const auto losses = random_losses(rng, 1 + rep % 40, 100.0);
        const auto weights =
            selection_weights(losses, compute_lambda(losses, schedule, total_rounds));
        for (auto w : weights) CHECK(w == 1);
    }
}

TEST_CASE("property: selection grows with lambda") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 200; ++rep) {
        const auto losses = random_losses(rng, 1 + rep % 30, 10.0);
        std::uniform_real_distribution<double> u(0.0, 12.0);
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        const auto w_lo = selection_weights(losses, lo);
        const auto w_hi = selection_weights(losses, hi);
        for (std::size_t i = 0; i < losses.size(); ++i) CHECK(w_lo[i] <= w_hi[i]);
    }
}

TEST_CASE("property: agreement with the conventional selection rule off equality") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int rep = 0; rep < 2000; ++rep) {
        const double loss = u(rng);
        const double lambda = u(rng);
        const int oracle = oracles::conventional_spl_weight(loss, lambda);
        const auto weights = selection_weights(std::vector<double>{loss}, lambda);
        if (oracle >= 0)
            CHECK(weights[0] == oracle);
        else
            CHECK(weights[0] == 1);  // tie resolved toward participation
    }
}

TEST_CASE("property: exponents live in (0,1] and hit 1 on every argmin view") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.01, 30.0);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> lambdas(1 + rep % 6);
        for (auto& l : lambdas) l = u(rng);
        const auto etas = compute_exponents(lambdas);
        const double lo = *std::min_element(lambdas.begin(), lambdas.end());
        for (std::size_t v = 0; v < lambdas.size(); ++v) {
            CHECK(etas[v] > 0.0);
            CHECK(etas[v] <= 1.0);
            if (lambdas[v] == lo) CHECK(etas[v] == 1.0);
        }
    }
}

TEST_CASE("make_view_pace bundles lambda, weights and count") {
    const auto schedule = SplSchedule::make(0.5, 2);
    const std::vector<double> losses{0.0, 2.0, 4.0};
    const auto pace = make_view_pace(losses, schedule, 1);
    CHECK(pace.lambda == doctest::Approx(2.0));
    CHECK(pace.weights == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(pace.selected_count == 2);
}
