#pragma once

// Scalar trigger machinery: open-loop bounds on h_pf and h_ch, the thresholds
// Gamma1, T*, T_M, the pre-blackout bound eps_r, and the trigger functions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/plant.hpp"

namespace evtrig {

/// A time that may be unbounded; nullopt stands for +infinity.
using MaybeTime = std::optional<double>;

struct TriggerConfig {
    double T = 0;         // look-ahead horizon in rho_T
    double sigma = 0;     // safety factor for T_M
    double sigma1 = 0;    // capacity safety factor in L3
    double root_tol = 1e-9;

    void validate() const {
        using Kind = ConfigError::Kind;
        if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError(Kind::BadParameter, "T must be positive");
        if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError(Kind::BadParameter, "sigma must lie in (0,1)");
        if (!(sigma1 > 0.0 && sigma1 < 1.0)) {
            throw ConfigError(Kind::BadParameter, "sigma1 must lie in (0,1)");
        }
        if (!(root_tol > 0.0)) throw ConfigError(Kind::BadParameter, "root_tol must be positive");
    }
};

struct TriggerState {
    double h_pf = 0;
    double eps = 0;
    double h_ch = 0;
};

namespace detail {

/// Bisection on [lo, hi] with pred(lo) false and pred(hi) true; returns hi end.
template <class Pred>
double bisect(double lo, double hi, double tol, Pred&& pred) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace detail

/// h_pf bound f1/f2 = (h0 - k) e^{-w tau} + k e^{mu tau}, k = W eps0/(w+mu).
[[nodiscard]] inline double h_pf_bound(const DerivedConstants& c, double tau, double h0,
                                       double eps0) {
    if (!(tau >= 0.0)) throw DomainError("h_pf_bound: tau < 0");
    if (!(eps0 >= 0.0)) throw DomainError("h_pf_bound: eps0 < 0");
    const double k = c.W * eps0 / (c.w + c.mu);
    return (h0 + k * std::expm1((c.w + c.mu) * tau)) * std::exp(-c.w * tau);
}

[[nodiscard]] inline double h_pf_bound_slope(const DerivedConstants& c, double tau, double h0,
                                             double eps0) {
    const double k = c.W * eps0 / (c.w + c.mu);
    return -c.w * (h0 - k) * std::exp(-c.w * tau) + k * c.mu * std::exp(c.mu * tau);
}

/// Smallest tau >= 0 where h_pf_bound reaches 1 with nonnegative slope.
///
/// h_pf_bound has at most one stationary point (a minimum) and is increasing
/// after it, so the scan starts there and only needs to bracket the crossing.
[[nodiscard]] inline MaybeTime gamma1(const DerivedConstants& c, double h0, double eps0,
                                      double scan_step, double tol = 1e-9) {
    if (!(eps0 >= 0.0)) throw DomainError("gamma1: eps0 < 0");
    if (!(scan_step > 0.0)) throw DomainError("gamma1: scan_step must be positive");
    const double k = c.W * eps0 / (c.w + c.mu);
    if (k == 0.0) {
        // Pure decay: the only candidate is tau = 0, whose slope is negative unless h0 = 0.
        return std::nullopt;
    }
    double start = 0.0;
    if (h0 > k) start = std::log(c.w * (h0 - k) / (k * c.mu)) / (c.w + c.mu);
    start = std::max(start, 0.0);

    auto f = [&](double tau) { return h_pf_bound(c, tau, h0, eps0); };
    if (start == 0.0 && f(0.0) >= 1.0 && h_pf_bound_slope(c, 0.0, h0, eps0) >= 0.0) return 0.0;

    double lo = start;
    double step = scan_step;
    for (int i = 0; i < 100000; ++i) {
        const double hi = lo + step;
        if (f(hi) >= 1.0) {
            return detail::bisect(lo, hi, tol, [&](double t) { return f(t) >= 1.0; });
        }
        lo = hi;
        if ((i + 1) % 1000 == 0) step *= 2.0;
    }
    throw NumericalError("gamma1: no crossing bracketed");
}

/// rho_T(h0) = (w+mu)(1-h0) / (W (e^{(w+mu)T} - 1)) + 1.
[[nodiscard]] inline double rho(const DerivedConstants& c, double T, double h0) {
    if (!(T > 0.0)) throw DomainError("rho: T must be positive");
    return (c.w + c.mu) * (1.0 - h0) / (c.W * std::expm1((c.w + c.mu) * T)) + 1.0;
}

/// eps_r(T_b) = min{ (e^{w T_b}-1)(w+mu) / (W (e^{(w+mu) T_b}-1)), e^{-mu_bar T_b} }.
[[nodiscard]] inline double epsilon_r(const DerivedConstants& c, double t_b) {
    if (!(t_b > 0.0)) throw DomainError("epsilon_r: blackout length must be positive");
    const double first = std::expm1(c.w * t_b) * (c.w + c.mu) / (c.W * std::expm1((c.w + c.mu) * t_b));
    return std::min(first, std::exp(-c.mu_bar * t_b));
}

/// Trigger bounds bound to one plant and one configuration. T*(p) and T_M(p)
/// are tabulated on construction for small p; larger p are computed on demand.
class Triggers {
public:
    static constexpr int kTabulated = 64;

    Triggers(const PlantModel& plant, TriggerConfig cfg)
        : c_(plant.constants()), cfg_(cfg), a_(plant.A()), beta_(plant.beta()), n_(plant.n()) {
        cfg_.validate();
        const MaybeTime g = evtrig::gamma1(c_, 1.0, 1.0, cfg_.T / 1000.0, cfg_.root_tol);
        if (!g) throw NumericalError("Gamma1(1,1) is unbounded");
        gamma11_ = *g;
        t_star_.resize(kTabulated + 1);
        for (int p = 0; p <= kTabulated; ++p) t_star_[p] = compute_t_star(p);
        growth_tm_.resize(kTabulated + 1);
        for (int p = 1; p <= kTabulated; ++p) growth_tm_[p] = growth(t_m(p));
    }

    /// Gamma1(1,1) does not depend on T, so it can seed T before a Triggers exists.
    [[nodiscard]] static double gamma11(const DerivedConstants& c, double tol = 1e-9) {
        const MaybeTime g = evtrig::gamma1(c, 1.0, 1.0, 1e-3, tol);
        if (!g) throw NumericalError("Gamma1(1,1) is unbounded");
        return *g;
    }

    [[nodiscard]] const TriggerConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const DerivedConstants& constants() const noexcept { return c_; }
    [[nodiscard]] double gamma1_11() const noexcept { return gamma11_; }

    [[nodiscard]] double h_pf_bound(double tau, double h0, double eps0) const {
        return evtrig::h_pf_bound(c_, tau, h0, eps0);
    }

    [[nodiscard]] MaybeTime gamma1(double h0, double eps0) const {
        return evtrig::gamma1(c_, h0, eps0, cfg_.T / 1000.0, cfg_.root_tol);
    }

    [[nodiscard]] double rho(double h0) const { return evtrig::rho(c_, cfg_.T, h0); }

    /// Open-loop growth factor ||e^{A tau}||_inf e^{beta tau / 2}.
    [[nodiscard]] double growth(double tau) const {
        return inf_norm(mat_exp(a_, tau)) * std::exp(0.5 * beta_ * tau);
    }

    /// Throws DomainError when h_pf_bound(tau, ...) > 1.
    [[nodiscard]] double h_ch_bound(double tau, double h0, double eps0, int p) const {
        if (p < 0) throw DomainError("h_ch_bound: negative p");
        const double hpf = h_pf_bound(tau, h0, eps0);
        if (hpf > 1.0) {
            throw DomainError("h_ch_bound: h_pf bound " + std::to_string(hpf) + " exceeds 1");
        }
        return std::ldexp(growth(tau) * eps0 / rho(hpf), -p);
    }

    /// As h_ch_bound, but +inf where the performance bound already exceeds 1.
    [[nodiscard]] double h_ch_bound_or_inf(double tau, double h0, double eps0, int p) const {
        if (p < 0) throw DomainError("h_ch_bound: negative p");
        const double hpf = h_pf_bound(tau, h0, eps0);
        if (hpf > 1.0) return std::numeric_limits<double>::infinity();
        return std::ldexp(growth(tau) * eps0 / rho(hpf), -p);
    }

    /// h_ch_bound_or_inf at tau = T_M(q), with the growth factor taken from the table.
    [[nodiscard]] double h_ch_at_tm(int q, double h0, double eps0, int p) const {
        if (q < 1 || q > kTabulated) return h_ch_bound_or_inf(t_m(q), h0, eps0, p);
        const double hpf = h_pf_bound(t_m(q), h0, eps0);
        if (hpf > 1.0) return std::numeric_limits<double>::infinity();
        return std::ldexp(growth_tm_[static_cast<std::size_t>(q)] * eps0 / rho(hpf), -p);
    }

    /// Gamma2(h0, eps0, p) > t_o, decided algebraically. The non-strict form
    /// answers Gamma2 >= t_o.
    [[nodiscard]] bool gamma2_exceeds(double h0, double eps0, int p, double t_o,
                                      bool strict = true) const {
        if (!(h0 >= 0.0 && h0 <= 1.0)) throw DomainError("gamma2_exceeds: h0 outside [0,1]");
        const double r = rho(h0);
        if (!(eps0 >= 0.0) || eps0 > r * (1.0 + 1e-12)) {
            throw DomainError("gamma2_exceeds: eps0 outside [0, rho_T(h0)]");
        }
        const double v = h_ch_bound_or_inf(t_o, h0, eps0, p);
        return strict ? v < 1.0 : v <= 1.0;
    }

    /// g(tau, p) whose first unit crossing on [0, T) defines T*(p).
    [[nodiscard]] double g(double tau, int p) const {
        const double s = (c_.w + c_.mu);
        const double big = std::expm1(s * cfg_.T);
        return std::ldexp(growth(tau), -p) * big / (big - std::expm1(s * tau));
    }

    [[nodiscard]] double t_star(int p) const {
        if (p < 0) throw DomainError("t_star: negative p");
        if (p <= kTabulated) return t_star_[static_cast<std::size_t>(p)];
        return compute_t_star(p);
    }

    /// T_M(p) = sigma min{Gamma1(1,1), T, T*(p)}.
    [[nodiscard]] double t_m(int p) const {
        if (p < 1) throw DomainError("t_m: p must be at least 1");
        return cfg_.sigma * std::min({gamma11_, cfg_.T, t_star(p)});
    }

    [[nodiscard]] double epsilon_r(double t_b) const { return evtrig::epsilon_r(c_, t_b); }

    [[nodiscard]] double L1(double h_pf, double eps, int cap) const {
        if (cap < 1) throw DomainError("L1: cap must be at least 1");
        return h_pf_bound(t_m(cap), h_pf, eps);
    }

    [[nodiscard]] double L2(double h_pf, double eps, int cap) const {
        if (cap < 1) throw DomainError("L2: cap must be at least 1");
        return h_ch_at_tm(cap, h_pf, eps, cap);
    }

    /// Look-ahead window: T_M(psi) when psi >= 1, otherwise 2/R.
    [[nodiscard]] double window(int psi, double rate) const {
        if (psi >= 1) return t_m(psi);
        if (!(rate > 0.0)) throw DomainError("window: psi = 0 with zero rate");
        return 2.0 / rate;
    }

    [[nodiscard]] double L1_tilde(double h_pf, double eps, int psi, double rate) const {
        return h_pf_bound(window(psi, rate), h_pf, eps);
    }

    [[nodiscard]] double L2_tilde(double h_pf, double eps, int psi, double rate) const {
        if (psi >= 1) return h_ch_at_tm(psi, h_pf, eps, psi);
        return h_ch_bound_or_inf(window(psi, rate), h_pf, eps, 0);
    }

    /// L3 = n log2(e^{mu_bar (tau_l - t)} eps / eps_r(T_b)) - sigma1 S_hat.
    /// Without a future blackout it is -inf and never binds.
    [[nodiscard]] double L3(double t, double eps, std::optional<double> tau_l, double t_b,
                            double s_hat) const {
        if (!tau_l) return -std::numeric_limits<double>::infinity();
        const double nn = static_cast<double>(n_);
        const double log_term = c_.mu_bar * (*tau_l - t) / std::log(2.0) +
                                std::log2(eps) - std::log2(epsilon_r(t_b));
        return nn * log_term - cfg_.sigma1 * s_hat;
    }

    /// Smallest p in [0, p_max] with h_ch_bound(tau(p), ..., p) <= 1, or nullopt.
    template <class Window>
    [[nodiscard]] std::optional<int> min_bits(double h_pf, double eps, int p_max, Window&& tau) const {
        for (int p = 0; p <= p_max; ++p) {
            const double t = tau(p);
            if (h_ch_bound_or_inf(t, h_pf, eps, p) <= 1.0) return p;
        }
        return std::nullopt;
    }

private:
    [[nodiscard]] double compute_t_star(int p) const {
        if (p == 0) return 0.0;
        const double step = cfg_.T / 1000.0;
        double lo = 0.0;
        for (int i = 1; i < 1000; ++i) {
            const double hi = step * i;
            if (g(hi, p) >= 1.0) {
                return detail::bisect(lo, hi, cfg_.root_tol, [&](double t) { return g(t, p) >= 1.0; });
            }
            lo = hi;
        }
        // g blows up as tau -> T, so the crossing lies in the last cell.
        const double hi = cfg_.T * (1.0 - 1e-15);
        return detail::bisect(lo, hi, cfg_.root_tol, [&](double t) { return g(t, p) >= 1.0; });
    }

    DerivedConstants c_;
    TriggerConfig cfg_;
    Matrix a_;
    double beta_;
    Eigen::Index n_;
    double gamma11_ = 0;
    std::vector<double> t_star_;
    std::vector<double> growth_tm_;
};

}  // namespace evtrig
