#include "sysrisk/clearing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sysrisk {

int ClearingOutcome::n_defaults() const {
    return static_cast<int>(std::count(defaulted.begin(), defaulted.end(), std::uint8_t{1}));
}

namespace detail {

int clearing_core(int n, const double* pi_t, const double* p_bar, const double* cash, double tol,
                  int max_iter, double* p, double* scratch) {
    for (int i = 0; i < n; ++i) p[i] = p_bar[i];
    for (int iter = 1; iter <= max_iter; ++iter) {
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            double recv = cash[i];
            const double* row = pi_t + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) recv += row[j] * p[j];
            double next = std::clamp(recv, 0.0, p_bar[i]);
            scratch[i] = next;
            diff = std::max(diff, std::abs(next - p[i]));
        }
        for (int i = 0; i < n; ++i) p[i] = scratch[i];
        if (diff < tol) return iter;
    }
    return -1;
}

}  // namespace detail

static std::vector<double> transpose(const LiabilityMatrix& pi) {
    std::vector<double> t(static_cast<std::size_t>(pi.n) * pi.n);
    for (int i = 0; i < pi.n; ++i)
        for (int j = 0; j < pi.n; ++j) t[static_cast<std::size_t>(i) * pi.n + j] = pi(j, i);
    return t;
}

ClearingOutcome clearing_vector(const ClearingProblem& cp, double tol) {
    const int n = cp.pi.n;
    if (static_cast<int>(cp.p_bar.size()) != n || static_cast<int>(cp.cash.size()) != n)
        throw std::invalid_argument("clearing_vector: dimension mismatch");
    if (tol <= 0.0) throw std::invalid_argument("clearing_vector: tol must be positive");
    for (double v : cp.p_bar)
        if (v < 0.0) throw std::invalid_argument("clearing_vector: p_bar must be nonnegative");

    std::vector<double> pi_t = transpose(cp.pi);
    ClearingOutcome out;
    out.p_star.resize(n);
    std::vector<double> scratch(n);
    int iters = detail::clearing_core(n, pi_t.data(), cp.p_bar.data(), cp.cash.data(), tol,
                                      kClearingMaxIter, out.p_star.data(), scratch.data());
    if (iters < 0) throw std::runtime_error("clearing_vector: iteration did not converge");

    double total_cash = std::accumulate(cp.cash.begin(), cp.cash.end(), 0.0);
    out.defaulted.assign(n, 0);
    if (total_cash <= 0.0) {
        out.all_bankrupt_shortcircuit = true;
        out.defaulted.assign(n, 1);
    } else {
        for (int i = 0; i < n; ++i)
            if (out.p_star[i] < cp.p_bar[i] - kDefaultFlagTol) out.defaulted[i] = 1;
    }
    classify_defaults(cp, out);
    return out;
}

void classify_defaults(const ClearingProblem& cp, ClearingOutcome& out) {
    const int n = cp.pi.n;
    std::vector<double> l = interbank_assets(cp.pi, cp.p_bar);
    out.fundamental.assign(n, 0);
    out.contagious.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        if (cp.cash[i] + l[i] < cp.p_bar[i] - kDefaultFlagTol) out.fundamental[i] = 1;
        if (out.defaulted[i] && !out.fundamental[i]) out.contagious[i] = 1;
    }
}

std::vector<double> clearing_vector_oracle(const ClearingProblem& cp) {
    const int n = cp.pi.n;
    if (n > 12) throw std::invalid_argument("clearing_vector_oracle: n must be <= 12");

    // Each bank is FULL (pays p_bar), PARTIAL (pays all available funds) or
    // ZERO (available funds nonpositive). Enumerate all 3^n patterns, solve
    // the linear system each implies, and keep consistent solutions.
    constexpr int kFull = 0, kPartial = 1, kZero = 2;
    const double eps = 1e-9;
    std::vector<int> state(n, 0);
    std::vector<double> best;
    double best_sum = -1.0;

    const std::int64_t n_patterns = static_cast<std::int64_t>(std::pow(3.0, n) + 0.5);
    for (std::int64_t code = 0; code < n_patterns; ++code) {
        std::int64_t c = code;
        for (int i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
        }

        // p_i = p_bar_i (FULL), 0 (ZERO), or (Pi' p)_i + cash_i (PARTIAL).
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (state[i] == kFull) {
                rhs(i) = cp.p_bar[i];
            } else if (state[i] == kZero) {
                rhs(i) = 0.0;
            } else {
                for (int j = 0; j < n; ++j) m(i, j) -= cp.pi(j, i);
                rhs(i) = cp.cash[i];
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd p = lu.solve(rhs);

        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            double avail = cp.cash[i];
            for (int j = 0; j < n; ++j) avail += cp.pi(j, i) * p(j);
            switch (state[i]) {
                case kFull:
                    ok = avail >= cp.p_bar[i] - eps;
                    break;
                case kPartial:
                    ok = p(i) >= -eps && p(i) <= cp.p_bar[i] + eps;
                    break;
                case kZero:
                    ok = avail <= eps;
                    break;
            }
        }
        if (!ok) continue;
        double sum = p.sum();
        if (sum > best_sum) {
            best_sum = sum;
            best.assign(p.data(), p.data() + n);
            for (int i = 0; i < n; ++i) best[i] = std::clamp(best[i], 0.0, cp.p_bar[i]);
        }
    }
    if (best.empty()) throw std::runtime_error("clearing_vector_oracle: no consistent pattern found");
    return best;
}

}  // namespace sysrisk
