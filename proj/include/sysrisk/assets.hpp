#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sysrisk {

enum class Family { Normal, StudentT, CorrelatedSix };

/// External-asset universe: K assets, their marginal distributions and
/// (for the six-asset set) the correlation parameter rho.
struct AssetUniverse {
    Family family = Family::Normal;
    int k_assets = 0;
    double dof = 0.0;        // Student-t degrees of freedom
    double rho = 0.0;        // CorrelatedSix only
    double sigma = 0.0;      // per-asset return scale
    double sigma_hat = 0.0;  // auxiliary-shock scale, CorrelatedSix only
    double default_prob = 0.0;  // single-asset fundamental default probability
};

/// Return scale sigma such that P(return < loss_threshold) = p for a
/// single-asset bank. loss_threshold must be negative and p in (0, .5)
/// (for p >= .5 the symmetric families have no finite solution).
double calibrate_scale(Family family, double dof, double p, double loss_threshold);

/// K independent assets, all with the same calibrated scale.
AssetUniverse independent_universe(Family family, double dof, int k_assets, double p,
                                   double loss_threshold);

/// The six-asset set: five base assets (1,2 negatively correlated with
/// correlation -rho; 3,4 positively correlated with +rho; 5 independent)
/// plus asset 6, the equal-weighted average of assets 1-5. Auxiliary
/// shocks carry variance (1+rho)/(1-rho) * sigma^2 so that every base
/// asset has variance sigma^2 for all rho; at rho = 1 the analytic limit
/// a2 = -a1, a4 = a3 is used.
AssetUniverse build_correlated_six(double rho, double p, double loss_threshold);

struct ReturnSample {
    int n_draws = 0;
    int k = 0;
    std::vector<double> data;  // row-major n_draws x k

    std::span<const double> row(int i) const {
        return {data.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
    }
};

/// Streams one row of returns per call; sample_returns and the Monte
/// Carlo loops share this so that a given (universe, seed) always yields
/// the same draw sequence.
class ReturnStream {
public:
    ReturnStream(const AssetUniverse& u, std::uint64_t seed);
    void next(double* out);  // writes k_assets values
    int width() const { return u_.k_assets; }

private:
    AssetUniverse u_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::student_t_distribution<double> student_;
};

ReturnSample sample_returns(const AssetUniverse& u, int n_draws, std::uint64_t seed);

/// Per-bank external-asset weights as fractions; each row sums to 1.
struct PortfolioMatrix {
    int n = 0;
    int k = 0;
    std::vector<double> w;  // row-major n x k

    double operator()(int i, int j) const { return w[static_cast<std::size_t>(i) * k + j]; }
    void validate() const;  // row sums within 1e-12 of 1, entries >= 0
};

/// Every bank holds the identical equal-weighted portfolio.
PortfolioMatrix full_diversification(int n, int k);
/// Bank i holds asset (i mod k) outright; with k >= n each bank gets its
/// own asset.
PortfolioMatrix full_diversity(int n, int k);
/// One-hot rows from a per-bank asset assignment (0-indexed).
PortfolioMatrix assignment_portfolio(const std::vector<int>& assignment, int k);

/// Ex-post external asset values: a_i * (1 + sum_k w_ik r_k).
std::vector<double> portfolio_value(const PortfolioMatrix& p, const std::vector<double>& a_money,
                                    std::span<const double> returns);

/// Mean pairwise L1 distance between bank portfolios, in [0,1].
double distance_D(const PortfolioMatrix& p);
/// Aggregate distance from the equal-weighted system portfolio.
double distance_G(const PortfolioMatrix& p);

}  // namespace sysrisk
