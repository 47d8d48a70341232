#pragma once

// Dense tableau simplex for max c^T x s.t. A x <= b, x >= 0 with b >= 0, so
// the slack basis is feasible from the start. Bland's rule prevents cycling.

#include <cmath>
#include <cstddef>
#include <vector>

#include "evtrig/errors.hpp"

namespace evtrig {

struct LpResult {
    std::vector<double> x;
    double objective = 0;
};

class DenseSimplex {
public:
    /// rows of a are constraints; every b_i must be >= 0.
    DenseSimplex(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                 double tol = 1e-9)
        : m_(a.size()), nv_(a.empty() ? 0 : a.front().size()), tol_(tol) {
        if (b.size() != m_) throw DimensionError("DenseSimplex: |b| != rows of A");
        cols_ = nv_ + m_;
        tab_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (a[i].size() != nv_) throw DimensionError("DenseSimplex: ragged A");
            if (!(b[i] >= 0.0)) throw DomainError("DenseSimplex: negative right-hand side");
            for (std::size_t j = 0; j < nv_; ++j) tab_[i][j] = a[i][j];
            tab_[i][nv_ + i] = 1.0;
            tab_[i][cols_] = b[i];
            basis_[i] = nv_ + i;
        }
        allowed_.assign(cols_, true);
    }

    /// Maximizes c over the current feasible region, then restricts the
    /// region to the optimal face so later calls refine among the optima.
    double maximize(const std::vector<double>& c) {
        if (c.size() != nv_) throw DimensionError("DenseSimplex: |c| != variables");
        std::vector<double> cost(cols_, 0.0);
        for (std::size_t j = 0; j < nv_; ++j) cost[j] = c[j];

        for (std::size_t iter = 0;; ++iter) {
            if (iter > 100000) throw NumericalError("DenseSimplex: iteration limit");
            const std::vector<double> red = reduced(cost);
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (allowed_[j] && !is_basic(j) && red[j] > tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) break;

            std::size_t leave = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tab_[i][enter] > tol_) {
                    const double ratio = tab_[i][cols_] / tab_[i][enter];
                    if (leave == m_ || ratio < best - tol_ ||
                        (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave == m_) throw NumericalError("DenseSimplex: unbounded objective");
            pivot(leave, enter);
        }

        const std::vector<double> red = reduced(cost);
        for (std::size_t j = 0; j < cols_; ++j) {
            if (!is_basic(j) && red[j] < -tol_) allowed_[j] = false;
        }
        double value = 0.0;
        for (std::size_t i = 0; i < m_; ++i) value += cost[basis_[i]] * tab_[i][cols_];
        return value;
    }

    [[nodiscard]] std::vector<double> solution() const {
        std::vector<double> x(nv_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < nv_) x[basis_[i]] = std::max(0.0, tab_[i][cols_]);
        }
        return x;
    }

private:
    [[nodiscard]] bool is_basic(std::size_t j) const {
        for (std::size_t b : basis_) {
            if (b == j) return true;
        }
        return false;
    }

    [[nodiscard]] std::vector<double> reduced(const std::vector<double>& cost) const {
        std::vector<double> red = cost;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) red[j] -= cb * tab_[i][j];
        }
        return red;
    }

    void pivot(std::size_t r, std::size_t c) {
        const double p = tab_[r][c];
        for (double& v : tab_[r]) v /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = tab_[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) tab_[i][j] -= f * tab_[r][j];
            tab_[i][c] = 0.0;
        }
        basis_[r] = c;
    }

    std::size_t m_, nv_, cols_ = 0;
    double tol_;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> allowed_;
};

enum class TieBreak { LexMin, LexMax };

/// Maximizes c^T x, then picks the lexicographically smallest (or largest) x among optima.
[[nodiscard]] inline LpResult lp_maximize_lex(const std::vector<std::vector<double>>& a,
                                              const std::vector<double>& b,
                                              const std::vector<double>& c, TieBreak tie,
                                              double tol = 1e-9) {
    DenseSimplex lp(a, b, tol);
    LpResult out;
    out.objective = lp.maximize(c);
    for (std::size_t k = 0; k < c.size(); ++k) {
        std::vector<double> e(c.size(), 0.0);
        e[k] = tie == TieBreak::LexMin ? -1.0 : 1.0;
        lp.maximize(e);
    }
    out.x = lp.solution();
    return out;
}

}  // namespace evtrig
