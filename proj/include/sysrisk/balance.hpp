#pragma once

#include <vector>

#include "sysrisk/graph.hpp"

namespace sysrisk {

/// Common balance-sheet composition ratios. Defaults are the baseline
/// parameterization: capital/assets = .1, external/capital = 5,
/// interbank asset/capital = 4, interbank liability/capital = 4, unit
/// interbank loan = 1.
struct BalanceRatios {
    double capital_to_assets = 0.1;     // w / (a + b + l)
    double external_to_capital = 5.0;   // a / w
    double ib_asset_to_capital = 4.0;   // l / w
    double ib_liability_to_capital = 4.0;  // p_bar / w
    double unit_loan = 1.0;

    /// Throws if the implied riskless asset or deposits are negative.
    void validate() const;

    /// Per-unit external return below which a bank fails even under full
    /// repayment by counterparties: -w/a.
    double loss_threshold() const { return -1.0 / external_to_capital; }
};

struct BankBalanceSheet {
    double a = 0.0;      // external risk assets
    double b = 0.0;      // riskless asset
    double l = 0.0;      // interbank assets
    double p_bar = 0.0;  // interbank liability face value
    double d = 0.0;      // deposits
    double w = 0.0;      // net worth
};

/// Balance sheets scaled by node degree: l = p_bar = degree * unit_loan,
/// other fields from the ratio system. Isolated banks carry no interbank
/// positions and are normalized to a = 1.
std::vector<BankBalanceSheet> build_balance_sheets(const Topology& t, const BalanceRatios& r);

struct LiabilityMatrix {
    int n = 0;
    std::vector<double> pi;  // row-major; pi[i*n+j] = weight of i's borrowing from j

    double operator()(int i, int j) const { return pi[static_cast<std::size_t>(i) * n + j]; }
};

/// Equal borrowing weights: pi_ij = 1/deg(i) for each neighbor j. Rows of
/// isolated banks are all zero.
LiabilityMatrix liability_weights(const Topology& t);

/// l = Pi' p_bar, the vector of interbank assets implied by the weights.
std::vector<double> interbank_assets(const LiabilityMatrix& pi, const std::vector<double>& p_bar);

}  // namespace sysrisk
