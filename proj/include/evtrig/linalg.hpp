#pragma once

// Small dense linear-algebra kernel. Dimensions here are tiny (n <= ~6), so
// every routine favours robustness over speed.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>

#include "evtrig/errors.hpp"

namespace evtrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinalgTolerances {
    double lyapunov_residual = 1e-9;
    double symmetry = 1e-10;  // relative to the largest entry
};

namespace detail {

inline void require_square(const Matrix& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
}

inline void require_finite(const Matrix& m, const char* who) {
    if (!m.allFinite()) throw DomainError(std::string(who) + ": non-finite entry");
}

inline bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace detail

/// e^{M t}, via Pade scaling-and-squaring.
[[nodiscard]] inline Matrix mat_exp(const Matrix& m, double t) {
    detail::require_square(m, "mat_exp");
    detail::require_finite(m, "mat_exp");
    if (t == 0.0 || m.isZero(0.0)) return Matrix::Identity(m.rows(), m.cols());
    const Matrix scaled = m * t;
    return scaled.exp();
}

/// Maximum absolute row sum.
[[nodiscard]] inline double inf_norm(const Matrix& m) {
    detail::require_finite(m, "inf_norm");
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

[[nodiscard]] inline double inf_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct EigenExtremes {
    double min;
    double max;
};

[[nodiscard]] inline EigenExtremes sym_eig_extremes(const Matrix& s,
                                                    const LinalgTolerances& tol = {}) {
    detail::require_square(s, "sym_eig_extremes");
    detail::require_finite(s, "sym_eig_extremes");
    if (!detail::is_symmetric(s, tol.symmetry)) {
        throw DomainError("sym_eig_extremes: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("sym_eig_extremes: no convergence");
    const auto& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

/// Largest singular value, as sqrt(lambda_max(M^T M)).
[[nodiscard]] inline double spec_norm(const Matrix& m) {
    detail::require_finite(m, "spec_norm");
    if (m.size() == 0) return 0.0;
    const Matrix gram = m.transpose() * m;
    const Matrix sym = 0.5 * (gram + gram.transpose());
    return std::sqrt(std::max(0.0, sym_eig_extremes(sym).max));
}

/// Largest real part over the spectrum of a general square matrix.
[[nodiscard]] inline double spectral_abscissa(const Matrix& m) {
    detail::require_square(m, "spectral_abscissa");
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) throw NumericalError("spectral_abscissa: no convergence");
    return solver.eigenvalues().real().maxCoeff();
}

[[nodiscard]] inline bool is_hurwitz(const Matrix& m) { return spectral_abscissa(m) < 0.0; }

/// Solves P Abar + Abar^T P = -Q for symmetric positive-definite P.
///
/// The equation is vectorized as (I (x) Abar^T + Abar^T (x) I) vec(P) = -vec(Q)
/// and solved by partial-pivot LU on the n^2 x n^2 system.
[[nodiscard]] inline Matrix solve_lyapunov(const Matrix& abar, const Matrix& q,
                                           const LinalgTolerances& tol = {}) {
    detail::require_square(abar, "solve_lyapunov");
    detail::require_square(q, "solve_lyapunov");
    if (abar.rows() != q.rows()) throw DimensionError("solve_lyapunov: Abar and Q sizes differ");
    detail::require_finite(abar, "solve_lyapunov");
    detail::require_finite(q, "solve_lyapunov");
    if (!detail::is_symmetric(q, tol.symmetry)) throw DomainError("solve_lyapunov: Q not symmetric");
    if (sym_eig_extremes(q, tol).min <= 0.0) {
        throw DomainError("solve_lyapunov: Q not positive definite");
    }
    if (!is_hurwitz(abar)) throw NotHurwitzError("solve_lyapunov: Abar is not Hurwitz");

    const Eigen::Index n = abar.rows();
    const Matrix at = abar.transpose();
    const Matrix id = Matrix::Identity(n, n);
    Matrix kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // Column-major vec: block (i, j) of I(x)At is id(i,j)*At, of At(x)I is At(i,j)*I.
            kron.block(i * n, j * n, n, n) = id(i, j) * at + at(i, j) * id;
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    const Vector sol = kron.partialPivLu().solve(rhs);
    Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
    p = 0.5 * (p + p.transpose());

    const double residual = inf_norm(Matrix(p * abar + at * p + q));
    if (!(residual <= tol.lyapunov_residual)) {
        throw NumericalError("solve_lyapunov: residual " + std::to_string(residual) +
                             " above tolerance");
    }
    if (sym_eig_extremes(p, tol).min <= 0.0) {
        throw NumericalError("solve_lyapunov: solution not positive definite");
    }
    return p;
}

}  // namespace evtrig
