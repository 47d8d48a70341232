#pragma once

#include <cmath>
#include <string>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"

namespace evtrig {

/// Decay rate beta, given either directly or as a fraction of lambda_m(Q)/lambda_M(P).
struct BetaSpec {
    enum class Kind { Absolute, FractionOfRate };
    Kind kind = Kind::Absolute;
    double value = 0.0;

    static BetaSpec absolute(double v) { return {Kind::Absolute, v}; }
    static BetaSpec fraction(double f) { return {Kind::FractionOfRate, f}; }
};

/// Scalar constants shared by every trigger bound.
struct DerivedConstants {
    double w = 0;       // lambda_m(Q)/lambda_M(P) - beta
    double mu = 0;      // ||A||_2 + beta/2
    double mu_bar = 0;  // ||A||_inf + beta/2
    double c = 0;       // W sqrt(lambda_m(P)) / (2 sqrt(n) ||PBK||_2)
    double W = 0;       // lambda_m(Q)/lambda_M(P) - a beta
    double lambda_min_p = 0;
    double lambda_max_p = 0;
    double lambda_min_q = 0;
};

class PlantModel {
public:
    [[nodiscard]] const Matrix& A() const noexcept { return a_mat_; }
    [[nodiscard]] const Matrix& B() const noexcept { return b_; }
    [[nodiscard]] const Matrix& K() const noexcept { return k_; }
    [[nodiscard]] const Matrix& Q() const noexcept { return q_; }
    [[nodiscard]] const Matrix& P() const noexcept { return p_; }
    /// A + BK.
    [[nodiscard]] const Matrix& Abar() const noexcept { return abar_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double margin_factor() const noexcept { return a_; }
    [[nodiscard]] double vd0() const noexcept { return vd0_; }
    [[nodiscard]] const DerivedConstants& constants() const noexcept { return k_consts_; }
    [[nodiscard]] Eigen::Index n() const noexcept { return a_mat_.rows(); }
    [[nodiscard]] Eigen::Index m() const noexcept { return b_.cols(); }

    /// V(x) = x^T P x.
    [[nodiscard]] double lyapunov_value(const Vector& x) const {
        if (x.size() != n()) throw DimensionError("lyapunov_value: state has wrong dimension");
        return x.dot(p_ * x);
    }

    /// V_d(t) = V_d0 e^{-beta t}; time is measured from t0 = 0.
    [[nodiscard]] double desired_performance(double t) const {
        if (t < 0.0) throw DomainError("desired_performance: t < t0");
        return vd0_ * std::exp(-beta_ * t);
    }

    friend PlantModel build_plant(const Matrix&, const Matrix&, const Matrix&, const Matrix&,
                                  BetaSpec, double, double, const LinalgTolerances&);

private:
    Matrix a_mat_, b_, k_, q_, p_, abar_;
    double beta_ = 0, a_ = 0, vd0_ = 0;
    DerivedConstants k_consts_;
};

/// Solves for the Lyapunov certificate and derives every scalar constant.
/// Rejects non-Hurwitz closed loops and configurations with W <= 0.
[[nodiscard]] inline PlantModel build_plant(const Matrix& A, const Matrix& B, const Matrix& K,
                                            const Matrix& Q, BetaSpec beta, double a, double vd0,
                                            const LinalgTolerances& tol = {}) {
    using Kind = ConfigError::Kind;
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || K.rows() != B.cols() || K.cols() != n ||
        Q.rows() != n || Q.cols() != n) {
        throw DimensionError("build_plant: inconsistent A/B/K/Q dimensions");
    }
    if (!(a > 1.0)) throw ConfigError(Kind::BadParameter, "margin factor a must exceed 1");
    if (!(beta.value > 0.0)) throw ConfigError(Kind::BadParameter, "beta must be positive");
    if (!(vd0 >= 0.0) || !std::isfinite(vd0)) {
        throw ConfigError(Kind::BadParameter, "V_d(t0) must be finite and nonnegative");
    }

    PlantModel pm;
    pm.a_mat_ = A;
    pm.b_ = B;
    pm.k_ = K;
    pm.q_ = Q;
    pm.abar_ = A + B * K;
    if (!is_hurwitz(pm.abar_)) {
        throw ConfigError(Kind::NotHurwitz, "A + BK is not Hurwitz");
    }
    pm.p_ = solve_lyapunov(pm.abar_, Q, tol);

    auto& c = pm.k_consts_;
    const auto ep = sym_eig_extremes(pm.p_, tol);
    c.lambda_min_p = ep.min;
    c.lambda_max_p = ep.max;
    c.lambda_min_q = sym_eig_extremes(Q, tol).min;
    const double rate = c.lambda_min_q / c.lambda_max_p;

    pm.beta_ = beta.kind == BetaSpec::Kind::Absolute ? beta.value : beta.value * rate;
    if (!(pm.beta_ > 0.0)) throw ConfigError(Kind::BadParameter, "resolved beta must be positive");
    pm.a_ = a;
    pm.vd0_ = vd0;

    c.W = rate - a * pm.beta_;
    if (!(c.W > 0.0)) {
        throw ConfigError(Kind::NonPositiveMargin,
                          "W = lambda_m(Q)/lambda_M(P) - a*beta = " + std::to_string(c.W) +
                              " must be positive");
    }
    c.w = rate - pm.beta_;
    c.mu = spec_norm(A) + pm.beta_ / 2.0;
    c.mu_bar = inf_norm(A) + pm.beta_ / 2.0;
    const double pbk = spec_norm(Matrix(pm.p_ * B * K));
    if (!(pbk > 0.0)) throw ConfigError(Kind::BadParameter, "PBK vanishes; c is undefined");
    c.c = c.W * std::sqrt(c.lambda_min_p) / (2.0 * std::sqrt(static_cast<double>(n)) * pbk);
    return pm;
}

}  // namespace evtrig
