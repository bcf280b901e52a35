#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sysrisk/risk.hpp"

namespace sysrisk {

/// A networked experiment setup: topology, balance ratios and the
/// external-asset universe.
struct Scenario {
    Topology topology;
    BalanceRatios ratios;
    AssetUniverse universe;
};

struct ContagionMatrix {
    int n = 0;
    std::vector<double> rates;  // row-major; (i,j) = defaults of j per 1000 single fundamental defaults of i
    std::vector<std::int64_t> event_counts;  // qualifying events per bank; 0 marks an undefined row

    double operator()(int i, int j) const { return rates[static_cast<std::size_t>(i) * n + j]; }
};

struct InfectionScores {
    std::vector<double> infectivity;     // NaN where undefined
    std::vector<double> susceptibility;  // NaN where undefined
    std::vector<std::int64_t> single_default_events;
    std::vector<std::int64_t> fundamental_defaults;
    std::vector<std::int64_t> contagious_defaults;
};

/// Conditional contagion rates under full diversity: over draws where
/// exactly one fundamental default occurred (at bank i), the expected
/// defaults of each bank j per 1000 such events.
ContagionMatrix contagion_matrix(const Scenario& sc, std::int64_t n_draws, std::uint64_t seed);

InfectionScores infection_scores(const Scenario& sc, std::int64_t n_draws, std::uint64_t seed);

struct DecompositionEntry {
    std::uint32_t mask = 0;        // fundamental-default set (bit i = bank i)
    std::vector<int> banks;        // 1-indexed members
    std::int64_t count = 0;
    double share = 0.0;            // fraction of total expected cost
};

struct DecompositionTable {
    std::vector<DecompositionEntry> entries;  // singletons, then pairs, ... lexicographic
    double total_cost = 0.0;                  // Monte Carlo expected cost
    double empty_set_cost = 0.0;              // must be zero
};

/// Attributes each draw's cost to the draw's fundamental-default subset.
/// n <= 10.
DecompositionTable decompose_collective_defaults(const Scenario& sc, const CostSpec& spec,
                                                 std::int64_t n_draws, std::uint64_t seed);

struct AllocationResult {
    double s = 0.0;
    std::vector<int> best_assignment;   // strict argmin, 0-indexed assets
    double best_cost = 0.0;
    double best_std_error = 0.0;
    std::vector<double> costs;          // per assignment code, bank 0 most significant digit
    std::vector<double> std_errors;
    std::vector<std::vector<int>> ties;  // co-optimal assignments, ascending lexicographic
    std::vector<int> canonical;          // lexicographically smallest co-optimal assignment
    std::int64_t n_draws = 0;
    std::uint64_t seed = 0;

    bool is_tie(const std::vector<int>& assignment) const;
};

/// Exhaustive 6^N sweep over one-asset-per-bank allocations with common
/// random numbers. Co-optimality uses the paired difference against the
/// strict minimizer: an assignment ties if its mean cost excess over the
/// best is within two standard errors of that paired difference.
/// Evaluates all cost exponents in s_list over the same draws.
std::vector<AllocationResult> optimize_allocation_discrete(const Scenario& sc,
                                                           const std::vector<double>& s_list,
                                                           std::int64_t n_draws, std::uint64_t seed,
                                                           int threads = 1);

struct DgPoint {
    double d = 0.0;
    double g = 0.0;
    double expected_cost = 0.0;
    double std_error = 0.0;
};

struct DgLandscape {
    std::vector<DgPoint> points;  // [0] full diversification, [1] diversity corner, then random
    int min_index = 0;
};

/// Random row-stochastic portfolios (uniform on the simplex) plus the two
/// deterministic corners, each evaluated over the same return draws.
DgLandscape dg_landscape(const Scenario& sc, const CostSpec& spec, int n_portfolios,
                         std::int64_t n_draws, std::uint64_t seed);

/// Closed-form costs of the three-bank example: pattern (a) holds the two
/// negatively correlated assets, pattern (b) substitutes the diversified
/// asset.
double cost_pattern_a(double s, double p);
double cost_pattern_b(double s, double p, double q);

/// The convexity threshold s* > 1 above which pattern (b) is at least as
/// costly as pattern (a): 3^s = 1 + (1 + (p-q)/(pq)) 2^s. Requires q < p.
double s_star_threshold(double p, double q);

struct TopologyCostRow {
    Topology topology;
    double entropy_degree = 0.0;
    double entropy_pagerank = 0.0;
    double hhi = 0.0;
    double cost_full_diversity = 0.0;
    double se_full_diversity = 0.0;
    double cost_full_diversification = 0.0;
    double se_full_diversification = 0.0;
    double cost_optimal = 0.0;
    double se_optimal = 0.0;
    std::vector<int> optimal_assignment;
};

/// All 21 connected 5-bank topologies: structural measures, costs under
/// full diversity and full diversification (independent assets), and the
/// optimal-allocation cost under the rho-correlated six-asset universe.
std::vector<TopologyCostRow> optimization_vs_topology(const CostSpec& spec, double rho, double p,
                                                      const BalanceRatios& ratios,
                                                      std::int64_t n_draws, std::uint64_t seed,
                                                      int threads = 1);

/// Spearman rank correlation with average ranks for ties. Returns nullopt
/// when either input is constant.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value for H0: rho = 0, via the t approximation.
double spearman_p_value(double rho, int n);

}  // namespace sysrisk
