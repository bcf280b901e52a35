#include "sysrisk/assets.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>

namespace sysrisk {

double calibrate_scale(Family family, double dof, double p, double loss_threshold) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("calibrate_scale: p must be in (0,1)");
    if (loss_threshold >= 0.0)
        throw std::invalid_argument("calibrate_scale: loss_threshold must be negative");
    double q;
    switch (family) {
        case Family::Normal:
        case Family::CorrelatedSix:
            q = boost::math::quantile(boost::math::normal_distribution<double>(), p);
            break;
        case Family::StudentT:
            if (dof <= 0.0) throw std::invalid_argument("calibrate_scale: dof must be positive");
            q = boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
            break;
        default:
            throw std::invalid_argument("calibrate_scale: unknown family");
    }
    if (q >= 0.0)
        throw std::invalid_argument("calibrate_scale: no finite scale (quantile is nonnegative)");
    return loss_threshold / q;
}

AssetUniverse independent_universe(Family family, double dof, int k_assets, double p,
                                   double loss_threshold) {
    if (k_assets < 1) throw std::invalid_argument("independent_universe: k_assets must be >= 1");
    if (family == Family::CorrelatedSix)
        throw std::invalid_argument("independent_universe: use build_correlated_six");
    AssetUniverse u;
    u.family = family;
    u.k_assets = k_assets;
    u.dof = dof;
    u.sigma = calibrate_scale(family, dof, p, loss_threshold);
    u.default_prob = p;
    return u;
}

AssetUniverse build_correlated_six(double rho, double p, double loss_threshold) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("build_correlated_six: rho must be in [0,1]");
    AssetUniverse u;
    u.family = Family::CorrelatedSix;
    u.k_assets = 6;
    u.rho = rho;
    u.sigma = calibrate_scale(Family::Normal, 0.0, p, loss_threshold);
    u.sigma_hat = rho < 1.0 ? std::sqrt((1.0 + rho) / (1.0 - rho)) * u.sigma : 0.0;
    u.default_prob = p;
    return u;
}

ReturnStream::ReturnStream(const AssetUniverse& u, std::uint64_t seed)
    : u_(u), rng_(seed), student_(u.family == Family::StudentT ? u.dof : 1.0) {
    if (u.k_assets < 1) throw std::invalid_argument("ReturnStream: empty universe");
}

void ReturnStream::next(double* out) {
    switch (u_.family) {
        case Family::Normal:
            for (int k = 0; k < u_.k_assets; ++k) out[k] = u_.sigma * normal_(rng_);
            break;
        case Family::StudentT:
            for (int k = 0; k < u_.k_assets; ++k) out[k] = u_.sigma * student_(rng_);
            break;
        case Family::CorrelatedSix: {
            double a1 = u_.sigma * normal_(rng_);
            double a2hat = u_.sigma_hat * normal_(rng_);
            double a3 = u_.sigma * normal_(rng_);
            double a4hat = u_.sigma_hat * normal_(rng_);
            double a5 = u_.sigma * normal_(rng_);
            double a2, a4;
            if (u_.rho < 1.0) {
                a2 = -u_.rho * a1 + (1.0 - u_.rho) * a2hat;
                a4 = u_.rho * a3 + (1.0 - u_.rho) * a4hat;
            } else {
                a2 = -a1;
                a4 = a3;
            }
            out[0] = a1;
            out[1] = a2;
            out[2] = a3;
            out[3] = a4;
            out[4] = a5;
            out[5] = (a1 + a2 + a3 + a4 + a5) / 5.0;
            break;
        }
    }
}

ReturnSample sample_returns(const AssetUniverse& u, int n_draws, std::uint64_t seed) {
    if (n_draws < 1) throw std::invalid_argument("sample_returns: n_draws must be >= 1");
    ReturnSample s;
    s.n_draws = n_draws;
    s.k = u.k_assets;
    s.data.resize(static_cast<std::size_t>(n_draws) * u.k_assets);
    ReturnStream stream(u, seed);
    for (int i = 0; i < n_draws; ++i) stream.next(s.data.data() + static_cast<std::size_t>(i) * u.k_assets);
    return s;
}

void PortfolioMatrix::validate() const {
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            double v = (*this)(i, j);
            if (v < 0.0) throw std::invalid_argument("PortfolioMatrix: negative weight");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("PortfolioMatrix: row does not sum to 1");
    }
}

PortfolioMatrix full_diversification(int n, int k) {
    PortfolioMatrix p;
    p.n = n;
    p.k = k;
    p.w.assign(static_cast<std::size_t>(n) * k, 1.0 / k);
    return p;
}

PortfolioMatrix full_diversity(int n, int k) {
    PortfolioMatrix p;
    p.n = n;
    p.k = k;
    p.w.assign(static_cast<std::size_t>(n) * k, 0.0);
    for (int i = 0; i < n; ++i) p.w[static_cast<std::size_t>(i) * k + (i % k)] = 1.0;
    return p;
}

PortfolioMatrix assignment_portfolio(const std::vector<int>& assignment, int k) {
    PortfolioMatrix p;
    p.n = static_cast<int>(assignment.size());
    p.k = k;
    p.w.assign(static_cast<std::size_t>(p.n) * k, 0.0);
    for (int i = 0; i < p.n; ++i) {
        if (assignment[i] < 0 || assignment[i] >= k)
            throw std::invalid_argument("assignment_portfolio: asset index out of range");
        p.w[static_cast<std::size_t>(i) * k + assignment[i]] = 1.0;
    }
    return p;
}

std::vector<double> portfolio_value(const PortfolioMatrix& p, const std::vector<double>& a_money,
                                    std::span<const double> returns) {
    if (static_cast<int>(a_money.size()) != p.n || static_cast<int>(returns.size()) != p.k)
        throw std::invalid_argument("portfolio_value: dimension mismatch");
    std::vector<double> out(p.n);
    for (int i = 0; i < p.n; ++i) {
        double r = 0.0;
        for (int k = 0; k < p.k; ++k) r += p(i, k) * returns[k];
        out[i] = a_money[i] * (1.0 + r);
    }
    return out;
}

double distance_D(const PortfolioMatrix& p) {
    if (p.n < 2) return 0.0;
    double sum = 0.0;
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.n; ++j) {
            if (i == j) continue;
            for (int k = 0; k < p.k; ++k) sum += std::abs(p(i, k) - p(j, k));
        }
    return sum / (2.0 * p.n * (p.n - 1));
}

double distance_G(const PortfolioMatrix& p) {
    double sum = 0.0;
    for (int k = 0; k < p.k; ++k) {
        double col = 0.0;
        for (int i = 0; i < p.n; ++i) col += p(i, k) - 1.0 / p.k;
        sum += std::abs(col);
    }
    return sum / p.n;
}

}  // namespace sysrisk
