#pragma once

// Data capacity over a run of channel slots: exact search for small
// instances, LP relaxation with floor rounding when no transmission can spill
// past the next slot, and the in-slot fallback otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evtrig/channel.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/lp.hpp"

namespace evtrig {

inline constexpr double kFloorNudge = 1e-9;

/// floor(x) with a small upward nudge so exact integers are not lost to rounding.
[[nodiscard]] inline long long nudged_floor(double x) {
    return static_cast<long long>(std::floor(x + kFloorNudge));
}

struct AllocationProblem {
    std::vector<Slot> slots;  // contiguous; the first may be a truncated slot
    int n = 1;

    void validate() const {
        if (slots.empty()) throw DomainError("AllocationProblem: no slots");
        if (n < 1) throw DomainError("AllocationProblem: n must be positive");
        for (std::size_t j = 0; j < slots.size(); ++j) {
            const Slot& s = slots[j];
            if (!(s.theta_end > s.theta_start)) throw DomainError("AllocationProblem: empty slot");
            if (j > 0 && s.theta_start != slots[j - 1].theta_end) {
                throw DomainError("AllocationProblem: slots not contiguous");
            }
            if (s.rate < 0.0 || s.pi_bar < 0) throw DomainError("AllocationProblem: negative R or cap");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return slots.size(); }
    [[nodiscard]] double start() const { return slots.front().theta_start; }
    [[nodiscard]] double end() const { return slots.back().theta_end; }

    /// Slots [j0, jf) of a schedule.
    static AllocationProblem slice(const ChannelSchedule& ch, std::size_t j0, std::size_t jf, int n) {
        if (!(j0 < jf && jf <= ch.slot_count())) throw DomainError("slice: invalid slot range");
        AllocationProblem p;
        p.n = n;
        for (std::size_t j = j0; j < jf; ++j) p.slots.push_back(ch.slot(j));
        return p;
    }

    /// Capacity problem from time t (inside slot j0 or at its start) to theta_{jf}.
    static AllocationProblem from_time(const ChannelSchedule& ch, double t, std::size_t jf, int n) {
        AllocationProblem p = slice(ch, ch.right_slot_index(t), jf, n);
        p.slots.front().theta_start = t;
        return p;
    }
};

/// True when no slot's cap-sized packet can spill past the following slot
/// (pi_j/R_j < T_{j+1}). The final slot has no successor and is exempt.
[[nodiscard]] inline bool spill_free(const AllocationProblem& p) {
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        const Slot& s = p.slots[j];
        if (s.pi_bar == 0) continue;
        const Slot& nx = p.slots[j + 1];
        if (!(s.pi_bar / s.rate < nx.theta_end - nx.theta_start)) return false;
    }
    return true;
}

struct CapacityPlan {
    enum class Kind { Exact, LpFloor, Fallback };

    Kind kind = Kind::Fallback;
    std::vector<long long> phi;
    std::vector<double> lp_phi;  // relaxed solution, LpFloor only
    long long value_bits = 0;    // n * sum(phi)
    double start = 0;            // anchor time of phi[0]
    double first_rate = 0;       // R of the anchor slot
    int n = 1;

    /// The retained per-slot value P_j for the anchor slot.
    [[nodiscard]] long long p_store() const { return phi.empty() ? 0 : phi.front(); }
};

[[nodiscard]] inline const char* to_string(CapacityPlan::Kind k) {
    switch (k) {
        case CapacityPlan::Kind::Exact: return "exact";
        case CapacityPlan::Kind::LpFloor: return "lp_floor";
        case CapacityPlan::Kind::Fallback: return "fallback";
    }
    return "?";
}

namespace detail {

inline CapacityPlan make_plan(const AllocationProblem& p, CapacityPlan::Kind kind,
                              std::vector<long long> phi) {
    CapacityPlan plan;
    plan.kind = kind;
    plan.n = p.n;
    plan.start = p.start();
    plan.first_rate = p.slots.front().rate;
    long long sum = 0;
    for (long long v : phi) sum += v;
    plan.value_bits = sum * p.n;
    plan.phi = std::move(phi);
    return plan;
}

}  // namespace detail

/// Transmission time left in slot j given the channel is busy until `busy`,
/// clamped to [0, T_j]. Equals the minimum over earlier anchors j1 of
/// theta_{j+1} - theta_{j1} - sum_{i=j1}^{j-1} phi_i/R_i.
[[nodiscard]] inline double available_time(const AllocationProblem& p,
                                           const std::vector<long long>& phi, std::size_t j) {
    if (j >= p.size() || phi.size() < j) throw DomainError("available_time: slot out of range");
    const double tj = p.slots[j].theta_end - p.slots[j].theta_start;
    double best = tj;
    for (std::size_t j1 = 0; j1 < j; ++j1) {
        double used = 0.0;
        for (std::size_t i = j1; i < j; ++i) {
            if (phi[i] > 0) used += static_cast<double>(phi[i]) / p.slots[i].rate;
        }
        best = std::min(best, p.slots[j].theta_end - p.slots[j1].theta_start - used);
    }
    return std::max(0.0, best);
}

struct ExactLimits {
    std::size_t max_slots = 8;
    long long max_per_slot = 20;
};

/// Globally optimal integer allocation by depth-first search with pruning.
/// Transmissions in a slot start once the channel is free and run back to
/// back; a slot can be used only while the channel frees up strictly before
/// its end, and every bit must arrive by the end of the problem.
[[nodiscard]] inline CapacityPlan capacity_exact(const AllocationProblem& p, ExactLimits lim = {}) {
    p.validate();
    const std::size_t k = p.size();
    if (k > lim.max_slots) {
        throw ScaleGuardError("capacity_exact: " + std::to_string(k) + " slots exceed the limit of " +
                              std::to_string(lim.max_slots));
    }
    std::vector<long long> cap(k);
    for (std::size_t j = 0; j < k; ++j) {
        const Slot& s = p.slots[j];
        cap[j] = s.pi_bar == 0 ? 0 : nudged_floor(s.rate * (s.theta_end - s.theta_start) + s.pi_bar);
        if (cap[j] > lim.max_per_slot) {
            throw ScaleGuardError("capacity_exact: slot " + std::to_string(j) + " bound " +
                                  std::to_string(cap[j]) + " exceeds the limit");
        }
    }
    std::vector<long long> suffix(k + 1, 0);
    for (std::size_t j = k; j-- > 0;) suffix[j] = suffix[j + 1] + cap[j];

    const double theta_f = p.end();
    std::vector<long long> cur(k, 0), best(k, 0);
    long long best_sum = -1;

    auto dfs = [&](auto&& self, std::size_t j, double busy, long long sum) -> void {
        if (sum + suffix[j] <= best_sum) return;
        if (j == k) {
            best_sum = sum;
            best = cur;
            return;
        }
        const Slot& s = p.slots[j];
        long long hi = 0;
        const double start = std::max(busy, s.theta_start);
        if (s.pi_bar > 0 && busy < s.theta_end) {
            const double in_slot = s.theta_end - start;
            hi = std::min(nudged_floor(s.rate * in_slot + s.pi_bar),
                          nudged_floor(s.rate * (theta_f - start)));
            hi = std::max(0LL, std::min(hi, cap[j]));
        }
        for (long long v = hi; v >= 0; --v) {
            cur[j] = v;
            const double next_busy = v > 0 ? start + static_cast<double>(v) / s.rate : busy;
            self(self, j + 1, next_busy, sum + v);
        }
        cur[j] = 0;
    };
    dfs(dfs, 0, p.start(), 0);
    return detail::make_plan(p, CapacityPlan::Kind::Exact, best);
}

/// Constraint rows of the spill-free linear program: per-slot maximum bits,
/// coupled availability for every earlier anchor, and receive-before-end.
inline void lp_constraints(const AllocationProblem& p, std::vector<std::vector<double>>& a,
                           std::vector<double>& b) {
    const std::size_t k = p.size();
    const auto& s = p.slots;
    auto inv_rate = [&](std::size_t i) { return s[i].rate > 0.0 ? 1.0 / s[i].rate : 0.0; };
    a.clear();
    b.clear();
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> row(k, 0.0);
        row[j] = 1.0;
        a.push_back(row);
        b.push_back(s[j].pi_bar == 0 || s[j].rate == 0.0
                        ? 0.0
                        : s[j].rate * (s[j].theta_end - s[j].theta_start) + s[j].pi_bar);
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (s[j].pi_bar == 0 || s[j].rate == 0.0) continue;
        for (std::size_t j1 = 0; j1 < j; ++j1) {
            std::vector<double> row(k, 0.0);
            row[j] = 1.0;
            for (std::size_t i = j1; i < j; ++i) row[i] = s[j].rate * inv_rate(i);
            a.push_back(row);
            b.push_back(s[j].rate * (s[j].theta_end - s[j1].theta_start) + s[j].pi_bar);
        }
    }
    for (std::size_t j1 = 0; j1 < k; ++j1) {
        std::vector<double> row(k, 0.0);
        for (std::size_t i = j1; i < k; ++i) row[i] = inv_rate(i);
        a.push_back(row);
        b.push_back(p.end() - s[j1].theta_start);
    }
}

/// LP relaxation rounded down. Ties among LP optima go to the
/// lexicographically largest phi, which keeps early slots fully used.
/// Requires spill_free(p).
[[nodiscard]] inline CapacityPlan capacity_lp_floor(const AllocationProblem& p) {
    p.validate();
    if (!spill_free(p)) throw DomainError("capacity_lp_floor: a packet can spill past the next slot");
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    lp_constraints(p, a, b);
    const LpResult r = lp_maximize_lex(a, b, std::vector<double>(p.size(), 1.0), TieBreak::LexMax);
    std::vector<long long> phi(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) phi[j] = std::max(0LL, nudged_floor(r.x[j]));
    CapacityPlan plan = detail::make_plan(p, CapacityPlan::Kind::LpFloor, std::move(phi));
    plan.lp_phi = r.x;
    return plan;
}

/// In-slot allocation floor(R_j T_j), zero in blackout slots.
[[nodiscard]] inline CapacityPlan capacity_fallback(const AllocationProblem& p) {
    p.validate();
    std::vector<long long> phi(p.size(), 0);
    for (std::size_t j = 0; j < p.size(); ++j) {
        const Slot& s = p.slots[j];
        if (s.pi_bar >= 1) phi[j] = nudged_floor(s.rate * (s.theta_end - s.theta_start));
    }
    return detail::make_plan(p, CapacityPlan::Kind::Fallback, std::move(phi));
}

/// LP floor when the slice is spill-free, fallback otherwise.
[[nodiscard]] inline CapacityPlan capacity_plan(const AllocationProblem& p) {
    return spill_free(p) ? capacity_lp_floor(p) : capacity_fallback(p);
}

/// Per-dimension bits of the anchor slot still usable at t: floor(P - R (t - start))_+.
[[nodiscard]] inline long long remaining_in_first(const CapacityPlan& plan, double t) {
    if (plan.phi.empty()) return 0;
    const double left = static_cast<double>(plan.phi.front()) - plan.first_rate * (t - plan.start);
    return std::max(0LL, nudged_floor(left));
}

/// Real-time lower bound S_hat(t) for t in the anchor slot of the plan.
[[nodiscard]] inline long long realtime_bound(const CapacityPlan& plan, double t) {
    if (t < plan.start) throw DomainError("realtime_bound: t precedes the plan anchor");
    long long rest = 0;
    for (std::size_t j = 1; j < plan.phi.size(); ++j) rest += plan.phi[j];
    return plan.n * (remaining_in_first(plan, t) + rest);
}

/// Online capacity tracker. Keeps, for the current slot j, the plan of
/// S(theta_j, tau_l(theta_j)) and exposes Phi, psi and S_hat.
class CapacityTracker {
public:
    CapacityTracker(const ChannelSchedule& ch, int n) : ch_(&ch), n_(n) {}

    /// Plan for slot j (anchored at theta_j). Empty optional when slot j is a
    /// blackout or no blackout follows it.
    const std::optional<CapacityPlan>& plan_for(std::size_t j) {
        if (cached_ && cached_slot_ == j) return plan_;
        cached_ = true;
        cached_slot_ = j;
        plan_.reset();
        if (!ch_->is_blackout(j)) {
            if (const auto b = ch_->next_blackout(ch_->theta(j))) {
                plan_ = capacity_plan(AllocationProblem::slice(*ch_, j, b->slot, n_));
            }
        }
        return plan_;
    }

    /// Phi(t) for t in slot j. Without a following blackout there is nothing to
    /// preserve and Phi is reported as unbounded (nullopt).
    std::optional<long long> phi(double t, std::size_t j) {
        if (ch_->is_blackout(j)) return 0;
        const auto& pl = plan_for(j);
        if (!pl) return std::nullopt;
        return remaining_in_first(*pl, t);
    }

    /// psi(t) = min(pbar(t), Phi(t)).
    int psi(double t, std::size_t j) {
        const int cap = ch_->cap(j);
        const auto ph = phi(t, j);
        if (!ph) return cap;
        return static_cast<int>(std::min<long long>(cap, *ph));
    }

    /// S_hat(t, tau_l) for t in slot j; nullopt when no blackout follows.
    std::optional<long long> s_hat(double t, std::size_t j) {
        if (ch_->is_blackout(j)) return 0;
        const auto& pl = plan_for(j);
        if (!pl) return std::nullopt;
        return realtime_bound(*pl, t);
    }

    /// Start of the artificial blackout in slot j: the first time Phi drops to zero.
    std::optional<double> artificial_blackout_start(std::size_t j) {
        if (ch_->is_blackout(j)) return std::nullopt;
        const auto& pl = plan_for(j);
        if (!pl) return std::nullopt;
        const double t = ch_->theta(j) + static_cast<double>(pl->p_store() - 1) / ch_->rate(j);
        if (pl->p_store() <= 0) return ch_->theta(j);
        if (t >= ch_->theta(j + 1)) return std::nullopt;
        return t;
    }

private:
    const ChannelSchedule* ch_;
    int n_;
    bool cached_ = false;
    std::size_t cached_slot_ = 0;
    std::optional<CapacityPlan> plan_;
};

}  // namespace evtrig
