#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sysrisk/assets.hpp"
#include "sysrisk/balance.hpp"
#include "sysrisk/clearing.hpp"
#include "sysrisk/graph.hpp"

namespace sysrisk {

/// Social cost C(n) = n^s, s >= 1.
struct CostSpec {
    double s = 4.0;
};

double cost(int n, const CostSpec& spec);

/// Closed-form expected cost under full diversity: the s-th moment of
/// Binomial(N, p).
double expected_cost_diversity(int n_banks, double p, const CostSpec& spec);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Expected cost under full diversification. Normal returns have the
/// closed form F_N * N^s with F_N the probability that the mean of N
/// i.i.d. draws falls below the calibrated threshold; Student-t uses Monte
/// Carlo integration (no closed form for t-convolutions).
McEstimate expected_cost_diversification(int n_banks, double p, const CostSpec& spec, Family family,
                                         double dof = 0.0, std::int64_t n_draws = 1000000,
                                         std::uint64_t seed = 20130701);

/// Probability that every bank defaults under full diversification
/// (the probability factor multiplying N^s).
McEstimate diversification_default_prob(int n_banks, double p, Family family, double dof = 0.0,
                                        std::int64_t n_draws = 1000000, std::uint64_t seed = 20130701);

struct FundamentalSetStat {
    std::int64_t count = 0;
    double cost = 0.0;
};

struct SimulationResult {
    double expected_cost = 0.0;
    double std_error = 0.0;
    std::vector<std::int64_t> default_histogram;  // index n = 0..N
    std::map<std::uint32_t, FundamentalSetStat> fundamental_set_counts;
    std::int64_t n_draws = 0;
    std::uint64_t seed = 0;
};

/// Precomputed per-scenario state shared by the Monte Carlo loops. All
/// members are read-only after construction.
struct ScenarioEngine {
    int n = 0;
    bool has_network = false;
    std::vector<double> pi_t;       // transposed liability weights, row-major
    std::vector<double> p_bar;
    std::vector<double> ib_assets;  // Pi' p_bar
    std::vector<double> b_minus_d;
    std::vector<double> a_money;
    std::vector<double> solvency_floor;  // a_i - w_i: fundamental default iff a~ < floor

    static ScenarioEngine build(const Topology& t, const std::vector<BankBalanceSheet>& sheets);

    struct DrawResult {
        int n_defaults = 0;
        std::uint32_t fundamental_mask = 0;
        std::uint32_t defaulted_mask = 0;
        bool all_bankrupt = false;
    };

    /// Evaluates one draw from the ex-post external asset values.
    /// work must hold at least 3*n doubles.
    DrawResult evaluate(const double* a_tilde, double* work) const;
};

/// Full three-step simulation: value portfolios, observe fundamental
/// defaults, clear interbank payments, accumulate n^s.
SimulationResult monte_carlo_expected_cost(const Topology& t,
                                           const std::vector<BankBalanceSheet>& sheets,
                                           const AssetUniverse& universe,
                                           const PortfolioMatrix& portfolio, const CostSpec& spec,
                                           std::int64_t n_draws, std::uint64_t seed);

enum class AllocationMode { FullDiversity, FullDiversification, MDiversified };

struct FamilySpec {
    Family family = Family::Normal;
    double dof = 0.0;
};

struct SweepRow {
    int n_banks = 0;
    Family family = Family::Normal;
    double dof = 0.0;
    AllocationMode mode = AllocationMode::FullDiversity;
    int m_diversified = 0;
    double expected_cost = 0.0;
    double std_error = 0.0;
    std::int64_t n_draws = 0;
    std::uint64_t seed = 0;
};

/// No-network cost tables. FullDiversity and FullDiversification emit one
/// row per (N, family); MDiversified emits one row per m in 0..N with m
/// banks on the equal-weighted portfolio of all N bank-specific assets.
std::vector<SweepRow> simultaneity_sweep(const std::vector<int>& n_list,
                                         const std::vector<FamilySpec>& families, double p,
                                         const CostSpec& spec, AllocationMode mode,
                                         std::int64_t n_draws, std::uint64_t seed);

}  // namespace sysrisk
