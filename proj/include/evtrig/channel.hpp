#pragma once

// Piecewise-constant channel: rate R_j and packet cap pi_j on left-open,
// right-closed slots (theta_j, theta_{j+1}]. Blackouts are slots with pi_j = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evtrig/errors.hpp"

namespace evtrig {

struct Slot {
    double theta_start = 0;
    double theta_end = 0;
    double rate = 0;  // bits per state dimension per unit time
    int pi_bar = 0;   // per-dimension packet cap
};

struct Blackout {
    double tau_l = 0;
    double tau_u = 0;
    std::size_t slot = 0;

    [[nodiscard]] double length() const noexcept { return tau_u - tau_l; }
};

/// Which one-sided value to read at a time that may be a breakpoint.
enum class Side { At, Right };

class ChannelSchedule {
public:
    ChannelSchedule() = default;

    /// Validates contiguity, monotonicity and the slot invariants.
    explicit ChannelSchedule(const std::vector<Slot>& slots) {
        if (slots.empty()) throw ConfigError(ConfigError::Kind::BadChannel, "channel has no slots");
        theta_.reserve(slots.size() + 1);
        theta_.push_back(slots.front().theta_start);
        for (std::size_t j = 0; j < slots.size(); ++j) {
            const Slot& s = slots[j];
            const std::string tag = "slot " + std::to_string(j);
            if (!std::isfinite(s.theta_start) || !std::isfinite(s.theta_end) ||
                !std::isfinite(s.rate)) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": non-finite value");
            }
            if (s.theta_start != theta_.back()) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": not contiguous");
            }
            if (!(s.theta_end > s.theta_start)) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": breakpoints not increasing");
            }
            if (s.rate < 0.0 || s.pi_bar < 0) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": negative rate or cap");
            }
            if (s.pi_bar > 0 && !(s.rate > 0.0)) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": usable slot with zero rate");
            }
            if (j > 0 && s.pi_bar == 0 && slots[j - 1].pi_bar == 0) {
                throw ConfigError(ConfigError::Kind::BadChannel, tag + ": consecutive blackout slots");
            }
            theta_.push_back(s.theta_end);
            rate_.push_back(s.rate);
            cap_.push_back(s.pi_bar);
        }
    }

    [[nodiscard]] std::size_t slot_count() const noexcept { return rate_.size(); }
    [[nodiscard]] double theta(std::size_t j) const { return theta_.at(j); }
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return theta_; }
    [[nodiscard]] double start() const noexcept { return theta_.front(); }
    [[nodiscard]] double end() const noexcept { return theta_.back(); }
    [[nodiscard]] double slot_length(std::size_t j) const { return theta_.at(j + 1) - theta_.at(j); }
    [[nodiscard]] double rate(std::size_t j) const { return rate_.at(j); }
    [[nodiscard]] int cap(std::size_t j) const { return cap_.at(j); }
    [[nodiscard]] int max_cap() const { return *std::max_element(cap_.begin(), cap_.end()); }
    [[nodiscard]] Slot slot(std::size_t j) const {
        return {theta_.at(j), theta_.at(j + 1), rate_.at(j), cap_.at(j)};
    }

    /// j with theta_j < t <= theta_{j+1}.
    [[nodiscard]] std::size_t slot_index(double t) const {
        if (!(t > theta_.front() && t <= theta_.back())) {
            throw HorizonError("slot_index: t = " + std::to_string(t) + " outside (" +
                               std::to_string(theta_.front()) + ", " +
                               std::to_string(theta_.back()) + "]");
        }
        const auto it = std::lower_bound(theta_.begin() + 1, theta_.end(), t);
        return static_cast<std::size_t>(it - theta_.begin()) - 1;
    }

    /// j with theta_j <= t < theta_{j+1}: the slot in force just after t.
    [[nodiscard]] std::size_t right_slot_index(double t) const {
        if (!(t >= theta_.front() && t < theta_.back())) {
            throw HorizonError("right_slot_index: t = " + std::to_string(t) +
                               " outside [theta_0, theta_N)");
        }
        const auto it = std::upper_bound(theta_.begin(), theta_.end(), t);
        return static_cast<std::size_t>(it - theta_.begin()) - 1;
    }

    /// Slot for a one-sided query. theta_0 has no left neighbour, so At falls back to Right there.
    [[nodiscard]] std::size_t index(double t, Side side) const {
        if (side == Side::Right || t == theta_.front()) return right_slot_index(t);
        return slot_index(t);
    }

    [[nodiscard]] double rate_at(double t) const { return rate_[slot_index(t)]; }
    [[nodiscard]] int cap_at(double t) const { return cap_[slot_index(t)]; }
    [[nodiscard]] double right_limit_rate(double t) const { return rate_[right_slot_index(t)]; }
    [[nodiscard]] int right_limit_cap(double t) const { return cap_[right_slot_index(t)]; }

    [[nodiscard]] bool is_breakpoint(double t) const {
        return std::binary_search(theta_.begin(), theta_.end(), t);
    }

    [[nodiscard]] bool is_blackout(std::size_t j) const { return cap_.at(j) == 0; }

    /// First blackout slot that starts at or after t. A time inside a blackout
    /// slot therefore looks ahead to the following blackout.
    [[nodiscard]] std::optional<Blackout> next_blackout(double t) const {
        for (std::size_t j = 0; j < cap_.size(); ++j) {
            if (cap_[j] == 0 && theta_[j] >= t) return Blackout{theta_[j], theta_[j + 1], j};
        }
        return std::nullopt;
    }

    /// First blackout slot with index greater than j.
    [[nodiscard]] std::optional<Blackout> next_blackout_after_slot(std::size_t j) const {
        for (std::size_t i = j + 1; i < cap_.size(); ++i) {
            if (cap_[i] == 0) return Blackout{theta_[i], theta_[i + 1], i};
        }
        return std::nullopt;
    }

    [[nodiscard]] std::vector<Blackout> blackouts() const {
        std::vector<Blackout> out;
        for (std::size_t j = 0; j < cap_.size(); ++j) {
            if (cap_[j] == 0) out.push_back({theta_[j], theta_[j + 1], j});
        }
        return out;
    }

    /// Smallest J with pi_j/R_j < sum_{i=j+1}^{j+1+J} T_i for every j in [j0, jf).
    /// The final slot of the schedule has an empty sum and is skipped. nullopt
    /// means no J can be certified within the horizon.
    [[nodiscard]] std::optional<int> compute_J(std::size_t j0, std::size_t jf) const {
        if (!(j0 < jf && jf <= slot_count())) throw DomainError("compute_J: invalid slot range");
        int worst = 0;
        for (std::size_t j = j0; j < jf; ++j) {
            if (j + 1 >= slot_count()) continue;
            if (cap_[j] == 0) continue;
            const double need = static_cast<double>(cap_[j]) / rate_[j];
            double acc = 0.0;
            int found = -1;
            for (std::size_t i = j + 1; i < slot_count(); ++i) {
                acc += slot_length(i);
                if (need < acc) {
                    found = static_cast<int>(i - (j + 1));
                    break;
                }
            }
            if (found < 0) return std::nullopt;
            worst = std::max(worst, found);
        }
        return worst;
    }

    /// Upper bound p / R(t) on the communication time of a p-bit-per-dimension packet.
    [[nodiscard]] double max_delay(double t, int p, Side side = Side::At) const {
        if (p < 0) throw DomainError("max_delay: negative packet size");
        if (p == 0) return 0.0;
        const double r = rate_[index(t, side)];
        if (!(r > 0.0)) throw InfeasibleTransmission("max_delay: zero rate with p > 0");
        return static_cast<double>(p) / r;
    }

private:
    std::vector<double> theta_;
    std::vector<double> rate_;
    std::vector<int> cap_;
};

struct TransmissionRecord {
    double t_k = 0;
    int p_k = 0;
    double r_k = 0;
    double r_tilde_k = 0;

    [[nodiscard]] double delta() const noexcept { return r_k - t_k; }
    [[nodiscard]] double delta_tilde() const noexcept { return r_tilde_k - t_k; }
};

/// Checks the four feasibility inequalities; throws InvariantBreach naming the
/// first one violated. `previous_update` is r~_{k-1} when a previous packet exists.
inline void validate_transmission(const TransmissionRecord& rec, const ChannelSchedule& ch,
                                  std::optional<double> previous_update = std::nullopt,
                                  double time_tol = 1e-12) {
    if (!(rec.delta() >= -time_tol) || !(rec.delta_tilde() >= rec.delta() - time_tol)) {
        throw InvariantBreach("causal communication violated: need r~_k >= r_k >= t_k");
    }
    if (rec.p_k < 0) throw InvariantBreach("negative packet size");
    const std::size_t j = ch.index(rec.t_k, Side::At);
    if (rec.p_k > ch.cap(j)) {
        throw InvariantBreach("packet size " + std::to_string(rec.p_k) + " exceeds cap " +
                              std::to_string(ch.cap(j)));
    }
    const double bound = rec.p_k == 0 ? 0.0 : static_cast<double>(rec.p_k) / ch.rate(j);
    if (rec.delta() > bound + time_tol) {
        throw InvariantBreach("communication time exceeds p_k / R(t_k)");
    }
    if (previous_update && rec.t_k < *previous_update - time_tol) {
        throw InvariantBreach("transmitted before the previous packet was applied");
    }
}

}  // namespace evtrig
