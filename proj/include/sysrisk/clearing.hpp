#pragma once

#include <cstdint>
#include <vector>

#include "sysrisk/balance.hpp"

namespace sysrisk {

struct ClearingProblem {
    LiabilityMatrix pi;
    std::vector<double> p_bar;  // face-value interbank liabilities
    std::vector<double> cash;   // a~ + b - d, may be negative
};

struct ClearingOutcome {
    std::vector<double> p_star;
    std::vector<std::uint8_t> defaulted;
    std::vector<std::uint8_t> fundamental;
    std::vector<std::uint8_t> contagious;
    bool all_bankrupt_shortcircuit = false;

    int n_defaults() const;
};

inline constexpr double kClearingTol = 1e-10;
inline constexpr double kDefaultFlagTol = 1e-8;
inline constexpr int kClearingMaxIter = 10000;

/// Greatest clearing payment vector by monotone iteration from p_bar,
/// each iterate clipped into [0, p_bar]. If total cash is <= 0 every bank
/// is marked defaulted (all-bankrupt rule) and p_star is the clipped
/// iteration limit, reported for diagnostics only. Fundamental and
/// contagious flags are filled via classify_defaults.
ClearingOutcome clearing_vector(const ClearingProblem& cp, double tol = kClearingTol);

/// Independent test oracle: enumerates candidate solvency patterns, solves
/// the implied linear system for each, keeps consistent solutions and
/// returns the one maximizing total payments. Intended for n <= 12.
std::vector<double> clearing_vector_oracle(const ClearingProblem& cp);

/// Sets fundamental flags from the full-repayment counterfactual
/// (cash_i + (Pi' p_bar)_i < p_bar_i - tol) and contagious as
/// defaulted-but-not-fundamental.
void classify_defaults(const ClearingProblem& cp, ClearingOutcome& out);

namespace detail {

/// Allocation-free iteration core used by the Monte Carlo hot loops.
/// pi_t is the transposed liability matrix (pi_t[i*n+j] = pi_ji), p and
/// scratch are caller-provided arrays of length n. Returns the iteration
/// count, or -1 on non-convergence.
int clearing_core(int n, const double* pi_t, const double* p_bar, const double* cash, double tol,
                  int max_iter, double* p, double* scratch);

}  // namespace detail

}  // namespace sysrisk
