#include "sysrisk/balance.hpp"

#include <stdexcept>

namespace sysrisk {

void BalanceRatios::validate() const {
    if (capital_to_assets <= 0.0 || capital_to_assets >= 1.0)
        throw std::invalid_argument("BalanceRatios: capital_to_assets must be in (0,1)");
    if (external_to_capital <= 0.0 || ib_asset_to_capital <= 0.0 || ib_liability_to_capital <= 0.0 ||
        unit_loan <= 0.0)
        throw std::invalid_argument("BalanceRatios: ratios must be strictly positive");
    double implied_b = 1.0 / capital_to_assets - external_to_capital - ib_asset_to_capital;
    if (implied_b < 0.0)
        throw std::invalid_argument("BalanceRatios: implied riskless asset b is negative");
    double implied_d = 1.0 / capital_to_assets - ib_liability_to_capital - 1.0;
    if (implied_d < 0.0) throw std::invalid_argument("BalanceRatios: implied deposits d are negative");
}

std::vector<BankBalanceSheet> build_balance_sheets(const Topology& t, const BalanceRatios& r) {
    r.validate();
    std::vector<BankBalanceSheet> sheets(t.n);
    for (int i = 0; i < t.n; ++i) {
        BankBalanceSheet& s = sheets[i];
        int k = t.degree(i);
        if (k >= 1) {
            // Bidirectional unit loans force l = p_bar = degree * unit_loan.
            s.l = s.p_bar = k * r.unit_loan;
            s.w = s.l / r.ib_asset_to_capital;
            s.a = r.external_to_capital * s.w;
            double total = s.w / r.capital_to_assets;
            s.b = total - s.a - s.l;
            s.d = total - s.p_bar - s.w;
        } else {
            // Isolated bank: no interbank positions, one money unit of
            // external assets.
            s.a = 1.0;
            s.w = s.a / r.external_to_capital;
            double total = s.w / r.capital_to_assets;
            s.b = total - s.a;
            s.d = total - s.w;
        }
        if (s.b < 0.0 || s.d < 0.0)
            throw std::invalid_argument("build_balance_sheets: inconsistent ratios (negative b or d)");
    }
    return sheets;
}

LiabilityMatrix liability_weights(const Topology& t) {
    LiabilityMatrix m;
    m.n = t.n;
    m.pi.assign(static_cast<std::size_t>(t.n) * t.n, 0.0);
    for (int i = 0; i < t.n; ++i) {
        int k = t.degree(i);
        if (k == 0) continue;
        for (int j = 0; j < t.n; ++j)
            if (t.edge(i, j)) m.pi[static_cast<std::size_t>(i) * t.n + j] = 1.0 / k;
    }
    return m;
}

std::vector<double> interbank_assets(const LiabilityMatrix& pi, const std::vector<double>& p_bar) {
    if (static_cast<int>(p_bar.size()) != pi.n)
        throw std::invalid_argument("interbank_assets: dimension mismatch");
    std::vector<double> l(pi.n, 0.0);
    for (int j = 0; j < pi.n; ++j)
        for (int i = 0; i < pi.n; ++i) l[i] += pi(j, i) * p_bar[j];
    return l;
}

}  // namespace sysrisk
