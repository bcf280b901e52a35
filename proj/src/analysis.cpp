#include "sysrisk/analysis.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace sysrisk {

namespace {

constexpr int kMaxBanks = 16;

PortfolioMatrix diversity_portfolio(const Scenario& sc) {
    if (sc.universe.k_assets < sc.topology.n)
        throw std::invalid_argument("full diversity requires at least one asset per bank");
    return full_diversity(sc.topology.n, sc.universe.k_assets);
}

struct ContagionAccumulator {
    int n;
    std::vector<std::int64_t> events;         // single-fundamental-default events per bank
    std::vector<std::int64_t> defaults;       // n x n tally over those events
    std::vector<std::int64_t> fundamental;    // per bank, all draws
    std::vector<std::int64_t> contagious;     // per bank, all draws

    explicit ContagionAccumulator(int n_banks)
        : n(n_banks), events(n_banks, 0),
          defaults(static_cast<std::size_t>(n_banks) * n_banks, 0), fundamental(n_banks, 0),
          contagious(n_banks, 0) {}
};

ContagionAccumulator run_contagion(const Scenario& sc, std::int64_t n_draws, std::uint64_t seed) {
    const int n = sc.topology.n;
    PortfolioMatrix portfolio = diversity_portfolio(sc);
    auto sheets = build_balance_sheets(sc.topology, sc.ratios);
    ScenarioEngine engine = ScenarioEngine::build(sc.topology, sheets);
    ReturnStream stream(sc.universe, seed);

    const int k = sc.universe.k_assets;
    std::vector<double> returns(k), a_tilde(n), work(3 * n);
    ContagionAccumulator acc(n);
    for (std::int64_t it = 0; it < n_draws; ++it) {
        stream.next(returns.data());
        for (int i = 0; i < n; ++i) a_tilde[i] = engine.a_money[i] * (1.0 + returns[i % k]);
        auto dr = engine.evaluate(a_tilde.data(), work.data());
        for (int j = 0; j < n; ++j) {
            bool fund = dr.fundamental_mask & (1u << j);
            bool def = dr.defaulted_mask & (1u << j);
            acc.fundamental[j] += fund;
            acc.contagious[j] += def && !fund;
        }
        if (std::popcount(dr.fundamental_mask) == 1) {
            int i = std::countr_zero(dr.fundamental_mask);
            ++acc.events[i];
            for (int j = 0; j < n; ++j)
                if (dr.defaulted_mask & (1u << j)) ++acc.defaults[static_cast<std::size_t>(i) * n + j];
        }
    }
    return acc;
}

}  // namespace

ContagionMatrix contagion_matrix(const Scenario& sc, std::int64_t n_draws, std::uint64_t seed) {
    ContagionAccumulator acc = run_contagion(sc, n_draws, seed);
    ContagionMatrix m;
    m.n = acc.n;
    m.rates.assign(static_cast<std::size_t>(acc.n) * acc.n,
                   std::numeric_limits<double>::quiet_NaN());
    m.event_counts = acc.events;
    for (int i = 0; i < acc.n; ++i) {
        if (acc.events[i] == 0) continue;  // undefined row
        for (int j = 0; j < acc.n; ++j)
            m.rates[static_cast<std::size_t>(i) * acc.n + j] =
                1000.0 * acc.defaults[static_cast<std::size_t>(i) * acc.n + j] / acc.events[i];
    }
    return m;
}

InfectionScores infection_scores(const Scenario& sc, std::int64_t n_draws, std::uint64_t seed) {
    ContagionAccumulator acc = run_contagion(sc, n_draws, seed);
    InfectionScores out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.infectivity.assign(acc.n, nan);
    out.susceptibility.assign(acc.n, nan);
    out.single_default_events = acc.events;
    out.fundamental_defaults = acc.fundamental;
    out.contagious_defaults = acc.contagious;
    for (int i = 0; i < acc.n; ++i) {
        if (acc.events[i] > 0) {
            std::int64_t caused = 0;
            for (int j = 0; j < acc.n; ++j)
                if (j != i) caused += acc.defaults[static_cast<std::size_t>(i) * acc.n + j];
            out.infectivity[i] = static_cast<double>(caused) / acc.events[i];
        }
        if (acc.fundamental[i] > 0)
            out.susceptibility[i] = static_cast<double>(acc.contagious[i]) / acc.fundamental[i];
    }
    return out;
}

DecompositionTable decompose_collective_defaults(const Scenario& sc, const CostSpec& spec,
                                                 std::int64_t n_draws, std::uint64_t seed) {
    const int n = sc.topology.n;
    if (n > 10) throw std::invalid_argument("decompose_collective_defaults: n must be <= 10");
    PortfolioMatrix portfolio = diversity_portfolio(sc);
    auto sheets = build_balance_sheets(sc.topology, sc.ratios);
    SimulationResult sim = monte_carlo_expected_cost(sc.topology, sheets, sc.universe, portfolio,
                                                     spec, n_draws, seed);

    double total = 0.0;
    for (const auto& [mask, stat] : sim.fundamental_set_counts)
        if (mask != 0) total += stat.cost;

    DecompositionTable table;
    table.total_cost = sim.expected_cost;
    if (auto it = sim.fundamental_set_counts.find(0); it != sim.fundamental_set_counts.end())
        table.empty_set_cost = it->second.cost;

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) masks.push_back(mask);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        // Lexicographic by member list: compare lowest set bits first.
        while (a && b) {
            int la = std::countr_zero(a), lb = std::countr_zero(b);
            if (la != lb) return la < lb;
            a &= a - 1;
            b &= b - 1;
        }
        return a < b;
    });
    for (std::uint32_t mask : masks) {
        DecompositionEntry e;
        e.mask = mask;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) e.banks.push_back(i + 1);
        if (auto it = sim.fundamental_set_counts.find(mask); it != sim.fundamental_set_counts.end()) {
            e.count = it->second.count;
            e.share = total > 0.0 ? it->second.cost / total : 0.0;
        }
        table.entries.push_back(std::move(e));
    }
    return table;
}

namespace {

// Shared precomputation for the exhaustive allocation sweep: returns,
// per-draw asset-default bitmasks and the clearing inputs.
struct SweepContext {
    ScenarioEngine engine;
    ReturnSample sample;
    std::vector<std::uint8_t> asset_default_bits;  // per draw, bit k = asset k below threshold
    std::vector<double> gross_return;              // per draw x asset: 1 + r
    int n = 0;
    int k = 0;
    std::int64_t n_draws = 0;

    SweepContext(const Scenario& sc, std::int64_t draws, std::uint64_t seed)
        : engine(ScenarioEngine::build(sc.topology, build_balance_sheets(sc.topology, sc.ratios))),
          sample(sample_returns(sc.universe, static_cast<int>(draws), seed)), n(sc.topology.n),
          k(sc.universe.k_assets), n_draws(draws) {
        if (n > kMaxBanks) throw std::invalid_argument("allocation sweep: too many banks");
        const double threshold = sc.ratios.loss_threshold();
        asset_default_bits.resize(draws);
        gross_return.resize(static_cast<std::size_t>(draws) * k);
        for (std::int64_t d = 0; d < draws; ++d) {
            std::uint8_t bits = 0;
            auto row = sample.row(static_cast<int>(d));
            for (int a = 0; a < k; ++a) {
                gross_return[static_cast<std::size_t>(d) * k + a] = 1.0 + row[a];
                if (row[a] < threshold) bits |= static_cast<std::uint8_t>(1u << a);
            }
            asset_default_bits[d] = bits;
        }
    }

    // Defaults for one assignment on one draw.
    int defaults_on_draw(std::int64_t d, const int* assignment) const {
        const std::uint8_t bits = asset_default_bits[d];
        if (bits == 0) return 0;
        std::uint32_t fund = 0;
        for (int i = 0; i < n; ++i)
            if (bits & (1u << assignment[i])) fund |= 1u << i;
        if (fund == 0) return 0;
        if (!engine.has_network) return std::popcount(fund);

        const double* gross = gross_return.data() + static_cast<std::size_t>(d) * k;
        double cash[kMaxBanks], p[kMaxBanks], scratch[kMaxBanks];
        double total_cash = 0.0;
        for (int i = 0; i < n; ++i) {
            cash[i] = engine.a_money[i] * gross[assignment[i]] + engine.b_minus_d[i];
            total_cash += cash[i];
        }
        if (total_cash <= 0.0) return n;
        int iters = detail::clearing_core(n, engine.pi_t.data(), engine.p_bar.data(), cash,
                                          kClearingTol, kClearingMaxIter, p, scratch);
        if (iters < 0) throw std::runtime_error("allocation sweep: clearing did not converge");
        int n_def = 0;
        for (int i = 0; i < n; ++i)
            if (p[i] < engine.p_bar[i] - kDefaultFlagTol) ++n_def;
        return n_def;
    }

    void per_draw_defaults(const int* assignment, std::uint8_t* out) const {
        for (std::int64_t d = 0; d < n_draws; ++d)
            out[d] = static_cast<std::uint8_t>(defaults_on_draw(d, assignment));
    }
};

std::vector<int> decode_assignment(std::int64_t code, int n, int k) {
    std::vector<int> digits(n);
    for (int i = n - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(code % k);
        code /= k;
    }
    return digits;  // bank 0 is the most significant digit, so code order = lex order
}

}  // namespace

bool AllocationResult::is_tie(const std::vector<int>& assignment) const {
    return std::find(ties.begin(), ties.end(), assignment) != ties.end();
}

std::vector<AllocationResult> optimize_allocation_discrete(const Scenario& sc,
                                                           const std::vector<double>& s_list,
                                                           std::int64_t n_draws,
                                                           std::uint64_t seed, int threads) {
    const int n = sc.topology.n;
    const int k = sc.universe.k_assets;
    if (n > 6) throw std::invalid_argument("optimize_allocation_discrete: n must be <= 6");
    if (s_list.empty()) throw std::invalid_argument("optimize_allocation_discrete: empty s_list");
    if (threads < 1) throw std::invalid_argument("optimize_allocation_discrete: threads must be >= 1");

    SweepContext ctx(sc, n_draws, seed);
    const int n_s = static_cast<int>(s_list.size());
    std::int64_t n_codes = 1;
    for (int i = 0; i < n; ++i) n_codes *= k;

    // cost lookup per s: n_defaults -> n^s
    std::vector<std::vector<double>> pow_table(n_s, std::vector<double>(n + 1));
    for (int si = 0; si < n_s; ++si)
        for (int d = 0; d <= n; ++d) pow_table[si][d] = cost(d, CostSpec{s_list[si]});

    std::vector<AllocationResult> results(n_s);
    for (int si = 0; si < n_s; ++si) {
        results[si].s = s_list[si];
        results[si].costs.resize(n_codes);
        results[si].std_errors.resize(n_codes);
        results[si].n_draws = n_draws;
        results[si].seed = seed;
    }

    // Each assignment is independent given the shared read-only returns, so
    // the sweep partitions over disjoint code ranges; results do not depend
    // on the partition count.
    auto sweep_range = [&](std::int64_t code_lo, std::int64_t code_hi) {
        std::vector<double> sum_c(n_s), sum_c2(n_s);
        for (std::int64_t code = code_lo; code < code_hi; ++code) {
            std::fill(sum_c.begin(), sum_c.end(), 0.0);
            std::fill(sum_c2.begin(), sum_c2.end(), 0.0);
            auto digits = decode_assignment(code, n, k);
            for (std::int64_t d = 0; d < n_draws; ++d) {
                int n_def = ctx.defaults_on_draw(d, digits.data());
                if (n_def == 0) continue;
                for (int si = 0; si < n_s; ++si) {
                    double c = pow_table[si][n_def];
                    sum_c[si] += c;
                    sum_c2[si] += c * c;
                }
            }
            for (int si = 0; si < n_s; ++si) {
                double mean = sum_c[si] / n_draws;
                double var = (sum_c2[si] - sum_c[si] * sum_c[si] / n_draws) /
                             (n_draws > 1 ? n_draws - 1 : 1);
                results[si].costs[code] = mean;
                results[si].std_errors[code] = std::sqrt(var / n_draws);
            }
        }
    };
    if (threads == 1) {
        sweep_range(0, n_codes);
    } else {
        std::vector<std::thread> pool;
        std::int64_t chunk = (n_codes + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::int64_t lo = t * chunk;
            std::int64_t hi = std::min<std::int64_t>(n_codes, lo + chunk);
            if (lo < hi) pool.emplace_back(sweep_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Strict minimizer per s, then co-optimality by paired differences
    // against it (common random numbers make the paired test the sharp one).
    for (int si = 0; si < n_s; ++si) {
        AllocationResult& res = results[si];
        std::int64_t best_code =
            std::min_element(res.costs.begin(), res.costs.end()) - res.costs.begin();
        res.best_assignment = decode_assignment(best_code, n, k);
        res.best_cost = res.costs[best_code];
        res.best_std_error = res.std_errors[best_code];

        std::vector<std::uint8_t> best_defaults(n_draws);
        ctx.per_draw_defaults(res.best_assignment.data(), best_defaults.data());

        for (std::int64_t code = 0; code < n_codes; ++code) {
            // Loose screen with independent standard errors first.
            double slack = 2.0 * std::sqrt(res.std_errors[code] * res.std_errors[code] +
                                           res.best_std_error * res.best_std_error);
            if (res.costs[code] > res.best_cost + slack) continue;
            auto digits = decode_assignment(code, n, k);
            double sum_d = 0.0, sum_d2 = 0.0;
            for (std::int64_t d = 0; d < n_draws; ++d) {
                int n_def = ctx.defaults_on_draw(d, digits.data());
                double diff = pow_table[si][n_def] - pow_table[si][best_defaults[d]];
                sum_d += diff;
                sum_d2 += diff * diff;
            }
            double mean_d = sum_d / n_draws;
            double var_d =
                (sum_d2 - sum_d * sum_d / n_draws) / (n_draws > 1 ? n_draws - 1 : 1);
            double se_d = std::sqrt(var_d / n_draws);
            if (mean_d <= 2.0 * se_d) res.ties.push_back(std::move(digits));
        }
        res.canonical = res.ties.front();  // codes scanned in lexicographic order
    }
    return results;
}

DgLandscape dg_landscape(const Scenario& sc, const CostSpec& spec, int n_portfolios,
                         std::int64_t n_draws, std::uint64_t seed) {
    const int n = sc.topology.n;
    const int k = sc.universe.k_assets;
    if (n_portfolios < 2) throw std::invalid_argument("dg_landscape: need at least the two corners");
    if (n > kMaxBanks) throw std::invalid_argument("dg_landscape: too many banks");

    auto sheets = build_balance_sheets(sc.topology, sc.ratios);
    ScenarioEngine engine = ScenarioEngine::build(sc.topology, sheets);
    ReturnSample sample = sample_returns(sc.universe, static_cast<int>(n_draws), seed);

    std::vector<PortfolioMatrix> portfolios;
    portfolios.push_back(full_diversification(n, k));
    portfolios.push_back(full_diversity(n, k));
    std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ULL);
    std::exponential_distribution<double> expd(1.0);
    while (static_cast<int>(portfolios.size()) < n_portfolios) {
        PortfolioMatrix p;
        p.n = n;
        p.k = k;
        p.w.resize(static_cast<std::size_t>(n) * k);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int a = 0; a < k; ++a) {
                double v = expd(rng);
                p.w[static_cast<std::size_t>(i) * k + a] = v;
                sum += v;
            }
            for (int a = 0; a < k; ++a) p.w[static_cast<std::size_t>(i) * k + a] /= sum;
        }
        portfolios.push_back(std::move(p));
    }

    DgLandscape out;
    std::vector<double> a_tilde(n), work(3 * n);
    std::vector<double> pow_table(n + 1);
    for (int d = 0; d <= n; ++d) pow_table[d] = cost(d, spec);

    for (const PortfolioMatrix& p : portfolios) {
        double sum_c = 0.0, sum_c2 = 0.0;
        for (std::int64_t it = 0; it < n_draws; ++it) {
            auto row = sample.row(static_cast<int>(it));
            for (int i = 0; i < n; ++i) {
                double r = 0.0;
                for (int a = 0; a < k; ++a) r += p(i, a) * row[a];
                a_tilde[i] = engine.a_money[i] * (1.0 + r);
            }
            auto dr = engine.evaluate(a_tilde.data(), work.data());
            double c = pow_table[dr.n_defaults];
            sum_c += c;
            sum_c2 += c * c;
        }
        DgPoint pt;
        pt.d = distance_D(p);
        pt.g = distance_G(p);
        pt.expected_cost = sum_c / n_draws;
        double var = (sum_c2 - sum_c * sum_c / n_draws) / (n_draws > 1 ? n_draws - 1 : 1);
        pt.std_error = std::sqrt(var / n_draws);
        out.points.push_back(pt);
    }
    out.min_index = static_cast<int>(
        std::min_element(out.points.begin(), out.points.end(),
                         [](const DgPoint& a, const DgPoint& b) {
                             return a.expected_cost < b.expected_cost;
                         }) -
        out.points.begin());
    return out;
}

double cost_pattern_a(double s, double p) { return p + p * std::pow(2.0, s); }

double cost_pattern_b(double s, double p, double q) {
    return p * (1.0 - q) + q * (1.0 - p) * std::pow(2.0, s) + p * q * std::pow(3.0, s);
}

double s_star_threshold(double p, double q) {
    if (!(q > 0.0 && q < p && p < 1.0))
        throw std::invalid_argument("s_star_threshold: need 0 < q < p < 1");
    const double coeff = 1.0 + (p - q) / (p * q);
    auto g = [&](double s) { return std::pow(3.0, s) - 1.0 - coeff * std::pow(2.0, s); };
    double lo = 1.0, hi = 2.0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("s_star_threshold: bracketing failed");
    }
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<TopologyCostRow> optimization_vs_topology(const CostSpec& spec, double rho, double p,
                                                      const BalanceRatios& ratios,
                                                      std::int64_t n_draws, std::uint64_t seed,
                                                      int threads) {
    const double threshold = ratios.loss_threshold();
    AssetUniverse independent = build_correlated_six(0.0, p, threshold);
    AssetUniverse correlated = build_correlated_six(rho, p, threshold);

    std::vector<TopologyCostRow> rows;
    std::uint64_t idx = 0;
    for (const Topology& t : enumerate_connected_topologies(5)) {
        std::uint64_t topo_seed = seed + 0x9e3779b97f4a7c15ULL * ++idx;
        TopologyCostRow row;
        row.topology = t;
        row.entropy_degree = fragility(t, Weighting::Degree).entropy;
        auto frag_pr = fragility(t, Weighting::PageRank);
        row.entropy_pagerank = frag_pr.entropy;
        row.hhi = fragility(t, Weighting::Degree).hhi;

        auto sheets = build_balance_sheets(t, ratios);
        SimulationResult div = monte_carlo_expected_cost(
            t, sheets, independent, assignment_portfolio({0, 1, 2, 3, 4}, 6), spec, n_draws,
            topo_seed);
        row.cost_full_diversity = div.expected_cost;
        row.se_full_diversity = div.std_error;
        SimulationResult divf = monte_carlo_expected_cost(
            t, sheets, independent, assignment_portfolio({5, 5, 5, 5, 5}, 6), spec, n_draws,
            topo_seed + 1);
        row.cost_full_diversification = divf.expected_cost;
        row.se_full_diversification = divf.std_error;

        Scenario sc{t, ratios, correlated};
        auto opt = optimize_allocation_discrete(sc, {spec.s}, n_draws, topo_seed + 2, threads);
        row.cost_optimal = opt[0].best_cost;
        row.se_optimal = opt[0].best_std_error;
        row.optimal_assignment = opt[0].best_assignment;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double rank = 0.5 * (i + j) + 1.0;
        for (int t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: bad input");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const int n = static_cast<int>(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

double spearman_p_value(double rho, int n) {
    if (n < 3) return 1.0;
    double r2 = std::min(rho * rho, 1.0 - 1e-15);
    double t = std::abs(rho) * std::sqrt((n - 2) / (1.0 - r2));
    boost::math::students_t_distribution<double> dist(n - 2);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace sysrisk
