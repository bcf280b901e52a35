#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "sysrisk/risk.hpp"

using namespace sysrisk;

namespace {

// Direct binomial-moment oracle with lgamma coefficients.
double binomial_moment(int n_banks, double p, double s) {
    double sum = 0.0;
    for (int n = 1; n <= n_banks; ++n) {
        double log_pmf = std::lgamma(n_banks + 1.0) - std::lgamma(n + 1.0) -
                         std::lgamma(n_banks - n + 1.0) + n * std::log(p) +
                         (n_banks - n) * std::log1p(-p);
        sum += std::exp(log_pmf + s * std::log(static_cast<double>(n)));
    }
    return sum;
}

}  // namespace

TEST_CASE("cost function") {
    CHECK(cost(0, CostSpec{4}) == 0.0);
    CHECK(cost(2, CostSpec{4}) == doctest::Approx(16.0));
    CHECK(cost(3, CostSpec{1}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(cost(-1, CostSpec{4}), std::invalid_argument);
    CHECK_THROWS_AS(cost(1, CostSpec{0.5}), std::invalid_argument);
}

TEST_CASE("diversity closed form") {
    CHECK(expected_cost_diversity(1, 0.37, CostSpec{4}) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(expected_cost_diversity(2, 0.1, CostSpec{4}) == doctest::Approx(0.34).epsilon(1e-14));
    CHECK(expected_cost_diversity(5, 0.1, CostSpec{1}) == doctest::Approx(0.5).epsilon(1e-14));
    // s-th moment of Binomial(N, p), cross-checked for N up to 20.
    for (int n : {3, 7, 12, 20})
        for (double s : {1.0, 2.0, 4.0, 8.0})
            CHECK(expected_cost_diversity(n, 0.15, CostSpec{s}) ==
                  doctest::Approx(binomial_moment(n, 0.15, s)).epsilon(1e-10));
    // Closed-form second moment: Np(1-p) + (Np)^2.
    CHECK(expected_cost_diversity(10, 0.3, CostSpec{2}) ==
          doctest::Approx(10 * 0.3 * 0.7 + 9.0).epsilon(1e-12));
}

TEST_CASE("diversification closed form and Monte Carlo") {
    auto one = expected_cost_diversification(1, 0.2, CostSpec{4}, Family::Normal);
    CHECK(one.value == doctest::Approx(0.2).epsilon(1e-12));

    // N = 5, p = .2: probability factor is approximately .03.
    auto prob = diversification_default_prob(5, 0.2, Family::Normal);
    CHECK(prob.value == doctest::Approx(0.0299).epsilon(0.01));
    auto five = expected_cost_diversification(5, 0.2, CostSpec{4}, Family::Normal);
    CHECK(five.value == doctest::Approx(prob.value * 625).epsilon(1e-12));

    // Student-t path reports a standard error and is seed-deterministic.
    auto t1 = expected_cost_diversification(5, 0.1, CostSpec{4}, Family::StudentT, 3.0, 200000, 4);
    auto t2 = expected_cost_diversification(5, 0.1, CostSpec{4}, Family::StudentT, 3.0, 200000, 4);
    CHECK(t1.value == t2.value);
    CHECK(t1.std_error > 0.0);

    // Normal value declines to zero for large N (p = .1, s = 4).
    double prev = expected_cost_diversification(30, 0.1, CostSpec{4}, Family::Normal).value;
    for (int n = 31; n <= 60; ++n) {
        double cur = expected_cost_diversification(n, 0.1, CostSpec{4}, Family::Normal).value;
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("monte carlo matches diversity closed form") {
    Topology t = build_topology(5, {});
    auto sheets = build_balance_sheets(t, BalanceRatios{});
    AssetUniverse u = independent_universe(Family::Normal, 0.0, 5, 0.1, -0.2);
    auto res = monte_carlo_expected_cost(t, sheets, u, full_diversity(5, 5), CostSpec{4}, 200000, 3);
    double exact = expected_cost_diversity(5, 0.1, CostSpec{4});
    CHECK(std::abs(res.expected_cost - exact) <= 3 * res.std_error);

    // Histogram accounts for every draw and reproduces the estimate.
    std::int64_t total = std::accumulate(res.default_histogram.begin(),
                                         res.default_histogram.end(), std::int64_t{0});
    CHECK(total == res.n_draws);
    double from_hist = 0.0;
    for (int n = 0; n <= 5; ++n)
        from_hist += static_cast<double>(res.default_histogram[n]) / res.n_draws * cost(n, CostSpec{4});
    CHECK(from_hist == doctest::Approx(res.expected_cost).epsilon(1e-9));
}

TEST_CASE("monte carlo matches diversification closed form") {
    Topology t = build_topology(5, {});
    auto sheets = build_balance_sheets(t, BalanceRatios{});
    AssetUniverse u = independent_universe(Family::Normal, 0.0, 5, 0.2, -0.2);
    auto res = monte_carlo_expected_cost(t, sheets, u, full_diversification(5, 5), CostSpec{4},
                                         200000, 17);
    double exact = expected_cost_diversification(5, 0.2, CostSpec{4}, Family::Normal).value;
    CHECK(std::abs(res.expected_cost - exact) <= 3 * res.std_error);
}

TEST_CASE("degenerate zero-variance universe yields zero cost") {
    std::vector<std::pair<int, int>> k5;
    for (int i = 1; i <= 5; ++i)
        for (int j = i + 1; j <= 5; ++j) k5.emplace_back(i, j);
    Topology t = build_topology(5, k5);
    auto sheets = build_balance_sheets(t, BalanceRatios{});
    AssetUniverse u;
    u.family = Family::Normal;
    u.k_assets = 5;
    u.sigma = 0.0;
    auto res = monte_carlo_expected_cost(t, sheets, u, full_diversity(5, 5), CostSpec{4}, 5000, 1);
    CHECK(res.expected_cost == 0.0);
    CHECK(res.default_histogram[0] == 5000);
}

TEST_CASE("determinism and monotonicity in p") {
    Topology t = build_topology(5, {});
    auto sheets = build_balance_sheets(t, BalanceRatios{});
    AssetUniverse u = independent_universe(Family::Normal, 0.0, 5, 0.1, -0.2);
    auto a = monte_carlo_expected_cost(t, sheets, u, full_diversity(5, 5), CostSpec{4}, 20000, 5);
    auto b = monte_carlo_expected_cost(t, sheets, u, full_diversity(5, 5), CostSpec{4}, 20000, 5);
    CHECK(a.expected_cost == b.expected_cost);
    CHECK(a.std_error == b.std_error);
    CHECK(a.default_histogram == b.default_histogram);

    // With common random numbers, raising p only loosens the standardized
    // threshold, so expected cost is nondecreasing along the p-grid.
    double prev = -1.0;
    for (double p : {0.05, 0.1, 0.2, 0.3}) {
        AssetUniverse up = independent_universe(Family::Normal, 0.0, 5, p, -0.2);
        auto r = monte_carlo_expected_cost(t, sheets, up, full_diversity(5, 5), CostSpec{4}, 20000, 5);
        CHECK(r.expected_cost >= prev);
        prev = r.expected_cost;
    }
}

TEST_CASE("fundamental set bookkeeping on the edgeless graph") {
    Topology t = build_topology(3, {});
    auto sheets = build_balance_sheets(t, BalanceRatios{});
    AssetUniverse u = independent_universe(Family::Normal, 0.0, 3, 0.2, -0.2);
    auto res = monte_carlo_expected_cost(t, sheets, u, full_diversity(3, 3), CostSpec{4}, 100000, 8);
    std::int64_t total = 0;
    for (const auto& [mask, stat] : res.fundamental_set_counts) total += stat.count;
    CHECK(total == res.n_draws);
    // Without a network, singleton masks occur with probability p(1-p)^2.
    double expect = 0.2 * 0.8 * 0.8;
    for (std::uint32_t mask : {1u, 2u, 4u}) {
        double freq = static_cast<double>(res.fundamental_set_counts.at(mask).count) / res.n_draws;
        CHECK(std::abs(freq - expect) <= 4 * std::sqrt(expect * (1 - expect) / res.n_draws));
    }
}

TEST_CASE("simultaneity sweep endpoints and modes") {
    CostSpec spec{4};
    auto div = simultaneity_sweep({5}, {{Family::Normal, 0.0}}, 0.1, spec,
                                  AllocationMode::FullDiversity, 50000, 123);
    auto dvf = simultaneity_sweep({5}, {{Family::Normal, 0.0}}, 0.1, spec,
                                  AllocationMode::FullDiversification, 50000, 123);
    auto sweep = simultaneity_sweep({5}, {{Family::Normal, 0.0}}, 0.1, spec,
                                    AllocationMode::MDiversified, 50000, 123);
    REQUIRE(div.size() == 1);
    REQUIRE(dvf.size() == 1);
    REQUIRE(sweep.size() == 6);
    // m = 0 is full diversity, m = N full diversification, draw for draw.
    CHECK(sweep[0].expected_cost == div[0].expected_cost);
    CHECK(sweep[5].expected_cost == dvf[0].expected_cost);

    // Both endpoints agree with their closed forms.
    CHECK(std::abs(div[0].expected_cost - expected_cost_diversity(5, 0.1, spec)) <=
          3 * div[0].std_error);
    double exact = expected_cost_diversification(5, 0.1, spec, Family::Normal).value;
    CHECK(std::abs(dvf[0].expected_cost - exact) <= 3 * dvf[0].std_error);
}
