#include "sysrisk/risk.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sysrisk {

double cost(int n, const CostSpec& spec) {
    if (n < 0) throw std::invalid_argument("cost: n must be nonnegative");
    if (spec.s < 1.0) throw std::invalid_argument("cost: s must be >= 1");
    return n == 0 ? 0.0 : std::pow(static_cast<double>(n), spec.s);
}

double expected_cost_diversity(int n_banks, double p, const CostSpec& spec) {
    if (n_banks < 1) throw std::invalid_argument("expected_cost_diversity: N must be >= 1");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("expected_cost_diversity: p in (0,1)");
    // Binomial pmf by recurrence in extended precision.
    long double pmf = std::pow(static_cast<long double>(1.0 - p), n_banks);
    long double ratio = static_cast<long double>(p) / (1.0 - p);
    long double sum = 0.0L;
    for (int n = 0; n <= n_banks; ++n) {
        if (n > 0) pmf *= ratio * (n_banks - n + 1) / n;
        if (n > 0) sum += pmf * std::pow(static_cast<long double>(n), static_cast<long double>(spec.s));
    }
    return static_cast<double>(sum);
}

McEstimate diversification_default_prob(int n_banks, double p, Family family, double dof,
                                        std::int64_t n_draws, std::uint64_t seed) {
    if (n_banks < 1) throw std::invalid_argument("diversification_default_prob: N must be >= 1");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("diversification_default_prob: p in (0,1)");
    if (family == Family::Normal) {
        boost::math::normal_distribution<double> nd;
        double z = boost::math::quantile(nd, p);
        return {boost::math::cdf(nd, std::sqrt(static_cast<double>(n_banks)) * z), 0.0};
    }
    if (family != Family::StudentT)
        throw std::invalid_argument("diversification_default_prob: unsupported family");
    boost::math::students_t_distribution<double> td(dof);
    double threshold = boost::math::quantile(td, p);
    std::mt19937_64 rng(seed);
    std::student_t_distribution<double> draw(dof);
    std::int64_t hits = 0;
    for (std::int64_t it = 0; it < n_draws; ++it) {
        double sum = 0.0;
        for (int i = 0; i < n_banks; ++i) sum += draw(rng);
        if (sum / n_banks < threshold) ++hits;
    }
    double freq = static_cast<double>(hits) / n_draws;
    double se = std::sqrt(freq * (1.0 - freq) / n_draws);
    return {freq, se};
}

McEstimate expected_cost_diversification(int n_banks, double p, const CostSpec& spec, Family family,
                                         double dof, std::int64_t n_draws, std::uint64_t seed) {
    McEstimate prob = diversification_default_prob(n_banks, p, family, dof, n_draws, seed);
    double scale = cost(n_banks, spec);
    return {prob.value * scale, prob.std_error * scale};
}

ScenarioEngine ScenarioEngine::build(const Topology& t, const std::vector<BankBalanceSheet>& sheets) {
    if (static_cast<int>(sheets.size()) != t.n)
        throw std::invalid_argument("ScenarioEngine: sheets/topology size mismatch");
    ScenarioEngine e;
    e.n = t.n;
    e.has_network = t.edge_count() > 0;
    if (e.has_network && !is_connected(t))
        throw std::invalid_argument("ScenarioEngine: a topology with edges must be connected");
    LiabilityMatrix pi = liability_weights(t);
    e.pi_t.assign(static_cast<std::size_t>(t.n) * t.n, 0.0);
    for (int i = 0; i < t.n; ++i)
        for (int j = 0; j < t.n; ++j) e.pi_t[static_cast<std::size_t>(i) * t.n + j] = pi(j, i);
    e.p_bar.resize(t.n);
    e.b_minus_d.resize(t.n);
    e.a_money.resize(t.n);
    e.solvency_floor.resize(t.n);
    for (int i = 0; i < t.n; ++i) {
        e.p_bar[i] = sheets[i].p_bar;
        e.b_minus_d[i] = sheets[i].b - sheets[i].d;
        e.a_money[i] = sheets[i].a;
        e.solvency_floor[i] = sheets[i].a - sheets[i].w;
    }
    e.ib_assets = interbank_assets(pi, e.p_bar);
    return e;
}

ScenarioEngine::DrawResult ScenarioEngine::evaluate(const double* a_tilde, double* work) const {
    DrawResult r;
    for (int i = 0; i < n; ++i)
        if (a_tilde[i] < solvency_floor[i]) r.fundamental_mask |= 1u << i;

    if (r.fundamental_mask == 0) return r;  // p_bar is a fixed point, no defaults

    if (!has_network) {
        r.defaulted_mask = r.fundamental_mask;
        r.n_defaults = std::popcount(r.fundamental_mask);
        return r;
    }

    double* cash = work;
    double* p = work + n;
    double* scratch = work + 2 * n;
    double total_cash = 0.0;
    for (int i = 0; i < n; ++i) {
        cash[i] = a_tilde[i] + b_minus_d[i];
        total_cash += cash[i];
    }
    if (total_cash <= 0.0) {
        r.all_bankrupt = true;
        r.defaulted_mask = (n >= 32) ? ~0u : ((1u << n) - 1);
        r.n_defaults = n;
        return r;
    }
    int iters = detail::clearing_core(n, pi_t.data(), p_bar.data(), cash, kClearingTol,
                                      kClearingMaxIter, p, scratch);
    if (iters < 0) throw std::runtime_error("ScenarioEngine: clearing iteration did not converge");
    for (int i = 0; i < n; ++i)
        if (p[i] < p_bar[i] - kDefaultFlagTol) r.defaulted_mask |= 1u << i;
    r.n_defaults = std::popcount(r.defaulted_mask);
    return r;
}

SimulationResult monte_carlo_expected_cost(const Topology& t,
                                           const std::vector<BankBalanceSheet>& sheets,
                                           const AssetUniverse& universe,
                                           const PortfolioMatrix& portfolio, const CostSpec& spec,
                                           std::int64_t n_draws, std::uint64_t seed) {
    if (portfolio.n != t.n || portfolio.k != universe.k_assets)
        throw std::invalid_argument("monte_carlo_expected_cost: dimension mismatch");
    if (n_draws < 1) throw std::invalid_argument("monte_carlo_expected_cost: n_draws must be >= 1");
    portfolio.validate();

    ScenarioEngine engine = ScenarioEngine::build(t, sheets);
    ReturnStream stream(universe, seed);

    const int n = t.n;
    const int k = universe.k_assets;
    std::vector<double> returns(k), a_tilde(n), work(3 * n);
    std::vector<double> cost_table(n + 1);
    for (int i = 0; i <= n; ++i) cost_table[i] = cost(i, spec);

    SimulationResult res;
    res.default_histogram.assign(n + 1, 0);
    res.n_draws = n_draws;
    res.seed = seed;
    double sum_c = 0.0, sum_c2 = 0.0;
    for (std::int64_t it = 0; it < n_draws; ++it) {
        stream.next(returns.data());
        for (int i = 0; i < n; ++i) {
            double r = 0.0;
            const double* row = portfolio.w.data() + static_cast<std::size_t>(i) * k;
            for (int a = 0; a < k; ++a) r += row[a] * returns[a];
            a_tilde[i] = engine.a_money[i] * (1.0 + r);
        }
        auto dr = engine.evaluate(a_tilde.data(), work.data());
        double c = cost_table[dr.n_defaults];
        sum_c += c;
        sum_c2 += c * c;
        ++res.default_histogram[dr.n_defaults];
        auto& stat = res.fundamental_set_counts[dr.fundamental_mask];
        ++stat.count;
        stat.cost += c;
    }
    res.expected_cost = sum_c / n_draws;
    double var = (sum_c2 - sum_c * sum_c / n_draws) / (n_draws > 1 ? n_draws - 1 : 1);
    res.std_error = std::sqrt(var / n_draws);
    return res;
}

namespace {

double family_quantile(const FamilySpec& f, double p) {
    if (f.family == Family::Normal)
        return boost::math::quantile(boost::math::normal_distribution<double>(), p);
    if (f.family == Family::StudentT)
        return boost::math::quantile(boost::math::students_t_distribution<double>(f.dof), p);
    throw std::invalid_argument("simultaneity_sweep: unsupported family");
}

struct StandardStream {
    std::mt19937_64 rng;
    std::normal_distribution<double> normal{0.0, 1.0};
    std::student_t_distribution<double> student;
    bool use_t;

    StandardStream(const FamilySpec& f, std::uint64_t seed)
        : rng(seed), student(f.family == Family::StudentT ? f.dof : 1.0),
          use_t(f.family == Family::StudentT) {}

    double next() { return use_t ? student(rng) : normal(rng); }
};

}  // namespace

std::vector<SweepRow> simultaneity_sweep(const std::vector<int>& n_list,
                                         const std::vector<FamilySpec>& families, double p,
                                         const CostSpec& spec, AllocationMode mode,
                                         std::int64_t n_draws, std::uint64_t seed) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("simultaneity_sweep: p in (0,1)");
    std::vector<SweepRow> rows;
    std::uint64_t stream_index = 0;
    for (const FamilySpec& fam : families) {
        double q = family_quantile(fam, p);
        for (int n_banks : n_list) {
            // One independent stream per (family, N) cell.
            std::uint64_t cell_seed = seed + 0x9e3779b97f4a7c15ULL * ++stream_index;
            StandardStream stream(fam, cell_seed);
            std::vector<double> z(n_banks);

            int m_lo = 0, m_hi = 0;
            if (mode == AllocationMode::MDiversified) {
                m_lo = 0;
                m_hi = n_banks;
            } else if (mode == AllocationMode::FullDiversification) {
                m_lo = m_hi = n_banks;
            }
            std::vector<double> sum_c(m_hi - m_lo + 1, 0.0), sum_c2(m_hi - m_lo + 1, 0.0);

            for (std::int64_t it = 0; it < n_draws; ++it) {
                double total = 0.0;
                int specific_defaults_all = 0;
                for (int i = 0; i < n_banks; ++i) {
                    z[i] = stream.next();
                    total += z[i];
                    if (z[i] < q) ++specific_defaults_all;
                }
                bool diversified_default = total / n_banks < q;
                // Under common random numbers every m reuses this draw:
                // banks 0..m-1 hold the equal-weighted portfolio, banks
                // m..N-1 their own asset.
                int prefix_defaults = 0;
                int prefix_defaults_counted = 0;
                for (int m = m_lo; m <= m_hi; ++m) {
                    while (prefix_defaults_counted < m) {
                        if (z[prefix_defaults_counted] < q) ++prefix_defaults;
                        ++prefix_defaults_counted;
                    }
                    int specific = specific_defaults_all - prefix_defaults;
                    int n_def = specific + (diversified_default ? m : 0);
                    double c = cost(n_def, spec);
                    sum_c[m - m_lo] += c;
                    sum_c2[m - m_lo] += c * c;
                }
            }
            for (int m = m_lo; m <= m_hi; ++m) {
                SweepRow row;
                row.n_banks = n_banks;
                row.family = fam.family;
                row.dof = fam.dof;
                row.mode = mode;
                row.m_diversified = m;
                row.expected_cost = sum_c[m - m_lo] / n_draws;
                double var = (sum_c2[m - m_lo] - sum_c[m - m_lo] * sum_c[m - m_lo] / n_draws) /
                             (n_draws > 1 ? n_draws - 1 : 1);
                row.std_error = std::sqrt(var / n_draws);
                row.n_draws = n_draws;
                row.seed = cell_seed;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

}  // namespace sysrisk
