#pragma once

// Oracles and generators shared by the unit tests. Everything here is written
// independently of the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "evtrig/evtrig.hpp"

namespace evtrig::testing {

inline Matrix benchmark_A() {
    Matrix a(2, 2);
    a << 1, -2, 1, 4;
    return a;
}
inline Matrix benchmark_B() {
    Matrix b(2, 1);
    b << 0, 1;
    return b;
}
inline Matrix benchmark_K() {
    Matrix k(1, 2);
    k << 2, -8;
    return k;
}
inline Vector benchmark_x0() {
    Vector x(2);
    x << 6, -4;
    return x;
}

inline PlantModel benchmark_plant(double vd0 = 1.0) {
    return build_plant(benchmark_A(), benchmark_B(), benchmark_K(), Matrix::Identity(2, 2), BetaSpec::fraction(0.8), 1.2,
                       vd0);
}

inline TriggerConfig benchmark_trigger(const PlantModel& pm) {
    TriggerConfig tc;
    tc.T = 0.1 * Triggers::gamma11(pm.constants());
    tc.sigma = 0.06;
    tc.sigma1 = 0.8;
    return tc;
}

inline std::vector<Blackout> benchmark_blackouts() {
    return {{4.88, 6.88, 2}, {11.52, 13.52, 5}, {17.05, 19.05, 8}};
}

/// Seeded generator with the handful of draws the property tests need.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }

    Matrix matrix(int r, int c, double scale) {
        Matrix m(r, c);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) m(i, j) = uniform(-scale, scale);
        }
        return m;
    }

    /// Random Hurwitz matrix: a random matrix shifted left of its spectral abscissa.
    Matrix hurwitz(int n) {
        Matrix m = matrix(n, n, 2.0);
        Eigen::EigenSolver<Matrix> es(m, false);
        const double shift = es.eigenvalues().real().maxCoeff() + uniform(0.2, 2.0);
        return m - shift * Matrix::Identity(n, n);
    }

    /// Contiguous slots starting at 0; a blackout is never followed by another.
    std::vector<Slot> slots(int count, double rate_lo, double rate_hi, double len_lo, double len_hi,
                            int cap_hi, double blackout_prob) {
        std::vector<Slot> out;
        double t = 0.0;
        for (int j = 0; j < count; ++j) {
            Slot s;
            s.theta_start = t;
            s.theta_end = t + uniform(len_lo, len_hi);
            s.rate = uniform(rate_lo, rate_hi);
            const bool prev_blackout = !out.empty() && out.back().pi_bar == 0;
            s.pi_bar = (!prev_blackout && coin(blackout_prob)) ? 0 : integer(1, cap_hi);
            t = s.theta_end;
            out.push_back(s);
        }
        return out;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// e^{M t} by a 40-term Taylor series on M t / 2^s, squared s times.
inline Matrix taylor_exp(const Matrix& m, double t, int terms = 40) {
    Matrix a = m * t;
    int s = 0;
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm / std::ldexp(1.0, s) > 0.5) ++s;
    a /= std::ldexp(1.0, s);
    Matrix sum = Matrix::Identity(m.rows(), m.cols());
    Matrix term = sum;
    for (int k = 1; k < terms; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

/// Exact capacity by dynamic programming over every packet sequence.
///
/// The channel state is the time the channel becomes free plus which side of
/// a breakpoint the next packet is attributed to. From each state one may send
/// a packet of 1..cap bits using the slot in force, wait for the next
/// breakpoint, or step across a breakpoint to the following slot. Packets must
/// be fully received by the end of the problem.
inline long long capacity_replay_oracle(const AllocationProblem& p) {
    const double tf = p.end();
    const double tol = 1e-12;
    std::map<std::pair<long long, int>, long long> memo;
    // state: time quantized to 1e-9 plus slot index in force for the next start
    std::function<long long(double, std::size_t)> best = [&](double t, std::size_t j) -> long long {
        const auto key = std::make_pair(std::llround(t * 1e9), static_cast<int>(j));
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        long long out = 0;
        const Slot& s = p.slots[j];
        if (s.pi_bar > 0 && t <= s.theta_end + tol) {
            for (int q = 1; q <= s.pi_bar; ++q) {
                const double done = t + q / s.rate;
                if (done > tf + tol) break;
                // after the packet, the next start lies in the slot containing `done`
                std::size_t nj = j;
                while (nj + 1 < p.size() && done > p.slots[nj].theta_end + tol) ++nj;
                out = std::max(out, q + best(std::max(done, p.slots[nj].theta_start), nj));
            }
        }
        if (j + 1 < p.size()) out = std::max(out, best(std::max(t, p.slots[j + 1].theta_start), j + 1));
        memo[key] = out;
        return out;
    };
    return p.n * best(p.start(), 0);
}

/// Replays a per-slot allocation: packets of at most cap bits sent back to
/// back as early as possible, each starting no later than its slot's end.
/// The short remainder packet goes first so the last start is as early as it can be.
/// Returns the delivered bit count, or -1 when the allocation is infeasible.
inline long long replay_plan(const AllocationProblem& p, const std::vector<long long>& phi) {
    const double tol = 1e-9;
    double busy = p.start();
    long long bits = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const Slot& s = p.slots[j];
        long long left = phi[j];
        if (left > 0 && s.pi_bar == 0) return -1;
        double t = std::max(busy, s.theta_start);
        while (left > 0) {
            if (t > s.theta_end + tol) return -1;
            const long long q = left % s.pi_bar != 0 ? left % s.pi_bar : s.pi_bar;
            t += static_cast<double>(q) / s.rate;
            left -= q;
            bits += q;
        }
        busy = std::max(busy, t);
    }
    if (busy > p.end() + tol) return -1;
    return p.n * bits;
}

/// Time at which all bits allocated before slot j have been received, by
/// event-by-event replay; the free time left in slot j follows from it.
inline double replay_available_time(const AllocationProblem& p, const std::vector<long long>& phi,
                                    std::size_t j) {
    double busy = p.start();
    for (std::size_t i = 0; i < j; ++i) {
        const Slot& s = p.slots[i];
        double t = std::max(busy, s.theta_start);
        if (phi[i] > 0) t += static_cast<double>(phi[i]) / s.rate;
        busy = std::max(busy, t);
    }
    const Slot& s = p.slots[j];
    return std::clamp(s.theta_end - std::max(busy, s.theta_start), 0.0, s.theta_end - s.theta_start);
}

/// Root of f(tau) = 1 on [0, hi] by plain bisection after a uniform scan;
/// returns hi when no crossing is found.
template <class F>
double first_crossing(F&& f, double hi, int scan = 4000, double tol = 1e-12) {
    double lo = 0.0;
    if (f(0.0) >= 1.0) return 0.0;
    for (int i = 1; i <= scan; ++i) {
        const double t = hi * i / scan;
        if (f(t) >= 1.0) {
            double a = lo, b = t;
            while (b - a > tol) {
                const double m = 0.5 * (a + b);
                (f(m) >= 1.0 ? b : a) = m;
            }
            return b;
        }
        lo = t;
    }
    return hi;
}

}  // namespace evtrig::testing
