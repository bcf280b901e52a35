#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "sysrisk/analysis.hpp"

using namespace sysrisk;

namespace {

Scenario edgeless5(double p) {
    return {build_topology(5, {}), BalanceRatios{}, build_correlated_six(0.0, p, -0.2)};
}

Scenario star5(double p) {
    Topology t = build_topology(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
    return {t, BalanceRatios{}, independent_universe(Family::Normal, 0.0, 5, p, -0.2)};
}

bool uses_only(const std::vector<int>& assignment, const std::set<int>& allowed) {
    return std::all_of(assignment.begin(), assignment.end(),
                       [&](int a) { return allowed.count(a) > 0; });
}

}  // namespace

TEST_CASE("contagion matrix") {
    Scenario none{build_topology(5, {}), BalanceRatios{},
                  independent_universe(Family::Normal, 0.0, 5, 0.2, -0.2)};
    auto m0 = contagion_matrix(none, 50000, 1);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            if (m0.event_counts[i] == 0) continue;
            CHECK(m0(i, j) == doctest::Approx(i == j ? 1000.0 : 0.0));
        }

    auto ms = contagion_matrix(star5(0.2), 100000, 2);
    double hub_mass = 0.0;
    for (int j = 1; j < 5; ++j) hub_mass += ms(0, j);
    CHECK(hub_mass > 0.0);  // the hub spreads
    for (int i = 0; i < 5; ++i) {
        REQUIRE(ms.event_counts[i] > 0);
        CHECK(ms(i, i) == doctest::Approx(1000.0));
        if (i > 0) {
            double leaf_mass = 0.0;
            for (int j = 0; j < 5; ++j)
                if (j != i) leaf_mass += ms(i, j);
            CHECK(hub_mass > leaf_mass);  // super-spreader dominates every leaf
        }
        for (int j = 0; j < 5; ++j) {
            CHECK(ms(i, j) >= 0.0);
            CHECK(ms(i, j) <= 1000.0);
        }
    }
}

TEST_CASE("infection scores") {
    Scenario none{build_topology(5, {}), BalanceRatios{},
                  independent_universe(Family::Normal, 0.0, 5, 0.2, -0.2)};
    auto s0 = infection_scores(none, 50000, 1);
    for (int i = 0; i < 5; ++i)
        if (s0.single_default_events[i] > 0) CHECK(s0.infectivity[i] == doctest::Approx(0.0));

    auto ss = infection_scores(star5(0.2), 200000, 3);
    for (int i = 0; i < 5; ++i) {
        REQUIRE(ss.fundamental_defaults[i] > 0);
        CHECK(ss.infectivity[i] >= 0.0);
        CHECK(ss.infectivity[i] <= 4.0);
        CHECK(ss.susceptibility[i] >= 0.0);
    }
    // The hub infects; leaves essentially cannot drag the hub down alone.
    for (int i = 1; i < 5; ++i) CHECK(ss.infectivity[0] > ss.infectivity[i]);
    // Leaves suffer contagion far more often than the hub.
    for (int i = 1; i < 5; ++i) CHECK(ss.susceptibility[i] > ss.susceptibility[0]);

    // Positive rank correlation with PageRank, negative between infectivity
    // and susceptibility.
    auto pr = pagerank(star5(0.2).topology);
    auto rho_pr = spearman(ss.infectivity, pr.pagerank);
    REQUIRE(rho_pr.has_value());
    CHECK(*rho_pr > 0.0);
    auto rho_is = spearman(ss.infectivity, ss.susceptibility);
    REQUIRE(rho_is.has_value());
    CHECK(*rho_is < 0.0);
}

TEST_CASE("collective-default decomposition: exact cross-check on iid banks") {
    Scenario sc{build_topology(3, {}), BalanceRatios{},
                independent_universe(Family::Normal, 0.0, 3, 0.2, -0.2)};
    auto table = decompose_collective_defaults(sc, CostSpec{4}, 200000, 11);
    CHECK(table.empty_set_cost == 0.0);
    REQUIRE(table.entries.size() == 7);
    CHECK(table.entries[0].banks == std::vector<int>{1});
    CHECK(table.entries[2].banks == std::vector<int>{3});
    CHECK(table.entries[3].banks == std::vector<int>{1, 2});
    CHECK(table.entries[6].banks == std::vector<int>{1, 2, 3});

    double share_sum = 0.0;
    for (const auto& e : table.entries) share_sum += e.share;
    CHECK(share_sum == doctest::Approx(1.0).epsilon(1e-12));

    // Exact shares: p^|S| (1-p)^(3-|S|) |S|^s / E[C], E[C] = 2.568.
    const double total = 2.568;
    CHECK(table.total_cost == doctest::Approx(total).epsilon(0.05));
    for (int i = 0; i < 3; ++i)
        CHECK(table.entries[i].share == doctest::Approx(0.2 * 0.64 / total).epsilon(0.1));
    for (int i = 3; i < 6; ++i)
        CHECK(table.entries[i].share == doctest::Approx(0.04 * 0.8 * 16 / total).epsilon(0.1));
    CHECK(table.entries[6].share == doctest::Approx(0.008 * 81 / total).epsilon(0.1));
}

TEST_CASE("decomposition: hub singleton dominates on the star") {
    auto table = decompose_collective_defaults(star5(0.2), CostSpec{4}, 200000, 12);
    double hub_share = 0.0;
    std::vector<double> leaf_shares;
    for (const auto& e : table.entries) {
        if (e.banks == std::vector<int>{1}) hub_share = e.share;
        else if (e.banks.size() == 1) leaf_shares.push_back(e.share);
    }
    REQUIRE(leaf_shares.size() == 4);
    for (double s : leaf_shares) CHECK(hub_share > s);
}

TEST_CASE("allocation optimizer: structure of the rho = 0 optima") {
    // Complete graph: full diversification (all banks on asset 6) co-optimal.
    std::vector<std::pair<int, int>> k5;
    for (int i = 1; i <= 5; ++i)
        for (int j = i + 1; j <= 5; ++j) k5.emplace_back(i, j);
    Scenario complete{build_topology(5, k5), BalanceRatios{}, build_correlated_six(0.0, 0.2, -0.2)};
    auto rc = optimize_allocation_discrete(complete, {4.0}, 3000, 21);
    REQUIRE(rc.size() == 1);
    CHECK(rc[0].costs.size() == 7776);
    CHECK(rc[0].is_tie({5, 5, 5, 5, 5}));

    // Edgeless graph: one diversified bank, four distinct specific assets.
    auto re = optimize_allocation_discrete(edgeless5(0.2), {4.0}, 3000, 22);
    bool found = false;
    for (const auto& tie : re[0].ties) {
        int sixes = static_cast<int>(std::count(tie.begin(), tie.end(), 5));
        std::set<int> specific;
        for (int a : tie)
            if (a != 5) specific.insert(a);
        if (sixes == 1 && static_cast<int>(specific.size()) == 4 &&
            uses_only(tie, {0, 1, 2, 3, 4, 5}))
            found = true;
    }
    CHECK(found);
}

TEST_CASE("allocation optimizer: determinism, threads, seed stability") {
    auto a = optimize_allocation_discrete(edgeless5(0.2), {4.0}, 2000, 5);
    auto b = optimize_allocation_discrete(edgeless5(0.2), {4.0}, 2000, 5);
    CHECK(a[0].costs == b[0].costs);
    CHECK(a[0].best_assignment == b[0].best_assignment);
    CHECK(a[0].ties == b[0].ties);

    auto threaded = optimize_allocation_discrete(edgeless5(0.2), {4.0}, 2000, 5, 2);
    CHECK(threaded[0].costs == a[0].costs);
    CHECK(threaded[0].canonical == a[0].canonical);

    auto other = optimize_allocation_discrete(edgeless5(0.2), {4.0}, 2000, 6);
    double combined = 3 * std::hypot(a[0].best_std_error, other[0].best_std_error);
    CHECK(std::abs(a[0].best_cost - other[0].best_cost) <= combined);

    // The canonical representative is the lexicographically smallest tie.
    REQUIRE(!a[0].ties.empty());
    CHECK(a[0].canonical == a[0].ties.front());
    CHECK(std::is_sorted(a[0].ties.begin(), a[0].ties.end()));
    CHECK(a[0].best_cost == *std::min_element(a[0].costs.begin(), a[0].costs.end()));
}

TEST_CASE("allocation indifference under linear cost") {
    // s = 1, independent assets, no network: every one-hot assignment of
    // the five bank-specific assets costs Np = 1.
    auto r = optimize_allocation_discrete(edgeless5(0.2), {1.0}, 5000, 30);
    auto code_of = [](const std::vector<int>& a) {
        std::size_t code = 0;
        for (int d : a) code = code * 6 + d;
        return code;
    };
    for (const auto& assignment : {std::vector<int>{0, 1, 2, 3, 4}, std::vector<int>{0, 0, 0, 0, 0},
                                   std::vector<int>{4, 3, 2, 1, 0}, std::vector<int>{2, 2, 4, 0, 1}})
        CHECK(r[0].costs[code_of(assignment)] == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("dg landscape") {
    Scenario sc = edgeless5(0.1);
    sc.universe = independent_universe(Family::Normal, 0.0, 3, 0.1, -0.2);
    auto lan = dg_landscape(sc, CostSpec{4}, 500, 2000, 77);
    REQUIRE(lan.points.size() == 500);  // corners count toward n_portfolios
    // Point 0 is the full-diversification corner.
    CHECK(lan.points[0].d == doctest::Approx(0.0));
    CHECK(lan.points[0].g == doctest::Approx(0.0));

    // Cost falls as portfolios spread apart (negative D-cost rank corr).
    std::vector<double> ds, costs;
    for (const auto& pt : lan.points) {
        ds.push_back(pt.d);
        costs.push_back(pt.expected_cost);
    }
    auto rho = spearman(ds, costs);
    REQUIRE(rho.has_value());
    CHECK(*rho < 0.0);
    CHECK(spearman_p_value(*rho, static_cast<int>(ds.size())) < 0.05);

    CHECK(lan.min_index >= 0);
    double best = lan.points[lan.min_index].expected_cost;
    for (const auto& pt : lan.points) CHECK(best <= pt.expected_cost);

    // Degenerate universe: zero cost everywhere.
    Scenario flat = sc;
    flat.universe.sigma = 0.0;
    auto lan0 = dg_landscape(flat, CostSpec{4}, 50, 500, 1);
    for (const auto& pt : lan0.points) CHECK(pt.expected_cost == 0.0);

    // Determinism.
    auto again = dg_landscape(sc, CostSpec{4}, 500, 2000, 77);
    CHECK(again.points.size() == lan.points.size());
    CHECK(again.points[5].expected_cost == lan.points[5].expected_cost);
    CHECK(again.min_index == lan.min_index);
}

TEST_CASE("three-bank cost patterns and the s* threshold") {
    // p = .2, q = .03, s = 1: C_a = .2 + .2*2 = .6, C_b = .194 + .048 + .018 = .26.
    CHECK(cost_pattern_a(1.0, 0.2) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(cost_pattern_b(1.0, 0.2, 0.03) == doctest::Approx(0.26).epsilon(1e-14));

    double s_star = s_star_threshold(0.2, 0.03);
    CHECK(s_star > 8.0);
    CHECK(s_star < 9.0);
    // Root of 3^s = 1 + (1 + (p-q)/(pq)) 2^s.
    double lhs = std::pow(3.0, s_star);
    double rhs = 1.0 + (1.0 + (0.2 - 0.03) / (0.2 * 0.03)) * std::pow(2.0, s_star);
    CHECK(std::abs(lhs - rhs) / rhs < 1e-8);
    // Bracketing: pattern (b) is cheaper below s*, dearer above.
    CHECK(cost_pattern_b(s_star - 0.01, 0.2, 0.03) < cost_pattern_a(s_star - 0.01, 0.2));
    CHECK(cost_pattern_b(s_star + 0.01, 0.2, 0.03) >= cost_pattern_a(s_star + 0.01, 0.2));

    CHECK_THROWS_AS(s_star_threshold(0.2, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(s_star_threshold(0.03, 0.2), std::invalid_argument);
}

TEST_CASE("spearman rank correlation") {
    CHECK(*spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(*spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(*spearman({1, 1, 2}, {1, 2, 3}) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
    CHECK_FALSE(spearman({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK_THROWS_AS(spearman({1}, {1, 2}), std::invalid_argument);

    CHECK(spearman_p_value(0.0, 21) == doctest::Approx(1.0));
    CHECK(spearman_p_value(0.8, 21) < 0.01);
    CHECK(spearman_p_value(0.6, 21) < spearman_p_value(0.3, 21));
}

TEST_CASE("optimization vs topology: smoke") {
    auto rows = optimization_vs_topology(CostSpec{4}, 0.8, 0.2, BalanceRatios{}, 200, 91);
    REQUIRE(rows.size() == 21);
    for (const auto& r : rows) {
        CHECK(r.topology.n == 5);
        CHECK(std::isfinite(r.entropy_degree));
        CHECK(std::isfinite(r.entropy_pagerank));
        CHECK(r.hhi >= 0.2 - 1e-12);
        CHECK(r.cost_optimal >= 0.0);
        CHECK(r.optimal_assignment.size() == 5);
        CHECK(std::isfinite(r.cost_full_diversity));
        CHECK(std::isfinite(r.cost_full_diversification));
    }
}
