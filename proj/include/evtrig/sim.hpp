#pragma once

// Closed-loop event-triggered simulation over a time-varying channel. Plant,
// controller and error bound are propagated in closed form between events;
// trigger times are located by a scan over a fixed grid plus every channel
// breakpoint, refined by bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evtrig/capacity.hpp"
#include "evtrig/channel.hpp"
#include "evtrig/codec.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/plant.hpp"
#include "evtrig/triggers.hpp"

namespace evtrig {

enum class Mode { NoBlackout, Blackout };
enum class PacketPolicy { MinBits, MaxBits };

struct SimConfig {
    Mode mode = Mode::Blackout;
    Vector x0;
    Vector x_hat0;
    double d_e0 = 0;
    double delay_factor = 1.0;
    PacketPolicy packet_policy = PacketPolicy::MaxBits;
    double horizon = 0;
    double scan_step = 0;  // 0 selects the default
    double sample_step = 0.005;
    double event_tol = 1e-9;
};

struct Scenario {
    PlantModel plant;
    ChannelSchedule channel;
    TriggerConfig trigger;
    SimConfig sim;
};

struct Sample {
    double t = 0;
    Vector x, x_hat;
    double V = 0, Vd = 0, h_pf = 0, eps = 0, h_ch = 0, d_e = 0;
    // Capacity tracking, blackout mode only. Empty where not applicable or unbounded.
    std::optional<double> Phi, psi, S_hat, L3;
};

struct TransmissionLog {
    TransmissionRecord rec;
    Packet packet;
    int p_lower = 0;
    int cap = 0;
    double h_pf_tk = 0;
    double eps_tk = 0;
    double h_ch_update = 0;        // h_ch(r~_k) after the jump
    double h_ch_update_bound = 0;  // h_ch_bound(r~_k - t_k, h_pf(t_k), eps(t_k), p_k)
    bool applied = false;          // update happened inside the horizon
};

struct BlackoutCheck {
    std::size_t slot = 0;
    double tau_l = 0, tau_u = 0;
    double eps_at_start = 0;
    double eps_r = 0;
    std::optional<double> h_ch_at_end;  // empty when tau_u lies beyond the horizon
};

struct ArtificialBlackout {
    std::size_t slot = 0;
    double start = 0, end = 0, rate = 0;
};

struct SimStats {
    std::size_t count = 0;
    std::optional<double> mean_interval, min_interval, min_update_interval;
    double bits_per_time = 0;
    double max_h_pf = 0;
    double min_de_margin = 0;
    std::vector<long long> bits_per_window;  // between consecutive blackouts
};

struct SimTrace {
    std::vector<Sample> samples;
    std::vector<TransmissionLog> transmissions;
    std::vector<BlackoutCheck> blackout_checks;
    std::vector<ArtificialBlackout> artificial_blackouts;
    std::vector<std::string> violations;  // recorded instead of thrown under force
    double t0 = 0, horizon = 0;
    double scan_step = 0;
    int n = 0;
};

struct AdmissibilityReport {
    struct Item {
        std::string name;
        bool pass = true;
        std::string witness;
    };
    std::vector<Item> items;

    [[nodiscard]] bool ok() const {
        return std::all_of(items.begin(), items.end(), [](const Item& i) { return i.pass; });
    }
};

[[nodiscard]] inline const char* to_string(Mode m) {
    return m == Mode::Blackout ? "blackout" : "no_blackout";
}
[[nodiscard]] inline const char* to_string(PacketPolicy p) {
    return p == PacketPolicy::MaxBits ? "max_bits" : "min_bits";
}

namespace detail {

/// a/b with 0/0 = 0 and a/0 = +inf.
inline double safe_ratio(double a, double b) {
    if (b > 0.0) return a / b;
    return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Default event scan step: min(shortest slot / 50, T_M(1) / 10).
[[nodiscard]] inline double default_scan_step(const ChannelSchedule& ch, const Triggers& tr) {
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ch.slot_count(); ++j) shortest = std::min(shortest, ch.slot_length(j));
    return std::min(shortest / 50.0, tr.t_m(1) / 10.0);
}

struct SimOptions {
    bool force = false;  // record violations instead of throwing
};

class Simulator {
public:
    using Options = SimOptions;

    Simulator(const Scenario& sc, Options opt = {})
        : sc_(sc), opt_(opt), trig_(sc.plant, sc.trigger), tracker_(sc.channel, n()),
          enc_(sc.plant.A(), sc.plant.Abar(), sc.sim.x_hat0, sc.sim.d_e0, sc.channel.start()),
          dec_(enc_) {
        const auto& cfg = sc_.sim;
        const auto nn = sc_.plant.n();
        if (cfg.x0.size() != nn || cfg.x_hat0.size() != nn) {
            throw ConfigError(ConfigError::Kind::BadParameter, "x0/x_hat0 dimension mismatch");
        }
        if (!(cfg.d_e0 >= inf_norm(Vector(cfg.x0 - cfg.x_hat0)))) {
            throw ConfigError(ConfigError::Kind::BadParameter, "d_e0 below |x0 - x_hat0|_inf");
        }
        if (!(cfg.horizon > sc_.channel.start() && cfg.horizon <= sc_.channel.end())) {
            throw ConfigError(ConfigError::Kind::BadParameter, "horizon outside the channel schedule");
        }
        if (!(cfg.delay_factor >= 0.0 && cfg.delay_factor <= 1.0)) {
            throw ConfigError(ConfigError::Kind::BadParameter, "delay_factor must lie in [0,1]");
        }
        if (!(cfg.sample_step > 0.0)) {
            throw ConfigError(ConfigError::Kind::BadParameter, "sample_step must be positive");
        }
        scan_step_ = cfg.scan_step > 0.0 ? cfg.scan_step : default_scan_step(sc_.channel, trig_);
        t0_ = sc_.channel.start();
        const Eigen::Index n2 = 2 * nn;
        block_ = Matrix::Zero(n2, n2);
        block_.topLeftCorner(nn, nn) = sc_.plant.A();
        block_.topRightCorner(nn, nn) = sc_.plant.B() * sc_.plant.K();
        block_.bottomRightCorner(nn, nn) = sc_.plant.Abar();
        anchor_t_ = t0_;
        anchor_x_ = cfg.x0;
        anchor_xh_ = cfg.x_hat0;
    }

    [[nodiscard]] const Triggers& triggers() const noexcept { return trig_; }
    [[nodiscard]] double scan_step() const noexcept { return scan_step_; }
    [[nodiscard]] int n() const { return static_cast<int>(sc_.plant.n()); }

    // ---- admissibility -------------------------------------------------

    [[nodiscard]] AdmissibilityReport check_admissibility() {
        AdmissibilityReport rep;
        const auto& ch = sc_.channel;
        auto add = [&](std::string name, bool pass, std::string witness = {}) {
            rep.items.push_back({std::move(name), pass, std::move(witness)});
        };
        const Snapshot s0 = snapshot(t0_);
        const std::size_t j0 = ch.right_slot_index(t0_);

        if (sc_.sim.mode == Mode::NoBlackout) {
            std::string bad_cap, bad_rate;
            for (std::size_t j = 0; j < ch.slot_count(); ++j) {
                if (ch.cap(j) < 1 && bad_cap.empty()) bad_cap = "slot " + std::to_string(j);
                for (int p = 1; p <= ch.cap(j) && bad_rate.empty(); ++p) {
                    if (ch.rate(j) < p / trig_.t_m(p)) {
                        bad_rate = "slot " + std::to_string(j) + ", p = " + std::to_string(p);
                    }
                }
            }
            add("pbar >= 1 in every slot", bad_cap.empty(), bad_cap);
            add("R >= p/T_M(p) for p <= pbar", bad_rate.empty(), bad_rate);
            if (bad_cap.empty()) {
                const double l1 = trig_.L1(s0.h_pf, s0.eps, ch.cap(j0));
                const double l2 = trig_.L2(s0.h_pf, s0.eps, ch.cap(j0));
                add("L1(t0) <= 1", l1 <= 1.0, "L1 = " + num(l1));
                add("L2(t0) <= 1", l2 <= 1.0, "L2 = " + num(l2));
            }
            return rep;
        }

        const int p_max = ch.max_cap();
        std::string bad_rate;
        for (std::size_t j = 0; j < ch.slot_count() && bad_rate.empty(); ++j) {
            if (ch.is_blackout(j)) continue;
            for (int p = 1; p <= p_max; ++p) {
                if (ch.rate(j) < (p + 2) / trig_.t_m(p)) {
                    bad_rate = "slot " + std::to_string(j) + ", p = " + std::to_string(p);
                    break;
                }
            }
        }
        add("R >= (p+2)/T_M(p) for p <= p_max", bad_rate.empty(), bad_rate);
        add("pbar(t0+) > 0", ch.cap(j0) > 0, "pbar = " + std::to_string(ch.cap(j0)));

        const double l3_0 = l3_at(t0_, s0.eps, j0);
        add("L3(t0, eps(t0)) <= 0", !(l3_0 > 0.0), "L3 = " + num(l3_0));
        std::string bad_b;
        for (const Blackout& b : ch.blackouts()) {
            if (b.tau_u >= ch.end()) continue;
            const double v = l3_at(b.tau_u, 1.0, ch.right_slot_index(b.tau_u));
            if (v > 0.0 && bad_b.empty()) bad_b = "blackout at slot " + std::to_string(b.slot) + ": L3 = " + num(v);
        }
        add("L3(tau_u, 1) <= 0 for every blackout", bad_b.empty(), bad_b);
        if (ch.cap(j0) > 0) {
            const int psi0 = tracker_.psi(t0_, j0);
            const double r0 = ch.rate(j0);
            const double l1 = trig_.L1_tilde(s0.h_pf, s0.eps, psi0, r0);
            const double l2 = trig_.L2_tilde(s0.h_pf, s0.eps, psi0, r0);
            add("L1~(t0) <= 1", l1 <= 1.0, "L1~ = " + num(l1));
            add("L2~(t0) <= 1", l2 <= 1.0, "L2~ = " + num(l2));
        }
        return rep;
    }

    // ---- run -------------------------------------------------------------

    [[nodiscard]] SimTrace run() {
        const auto& ch = sc_.channel;
        const double horizon = sc_.sim.horizon;
        SimTrace tr;
        tr.t0 = t0_;
        tr.horizon = horizon;
        tr.scan_step = scan_step_;
        tr.n = n();

        // Fixed sample times: grid, blackout edges and the horizon.
        std::vector<double> times;
        for (std::int64_t i = 0;; ++i) {
            const double t = t0_ + static_cast<double>(i) * sc_.sim.sample_step;
            if (t > horizon) break;
            times.push_back(t);
        }
        if (sc_.sim.mode == Mode::Blackout) {
            for (const Blackout& b : ch.blackouts()) {
                if (b.tau_l <= horizon) times.push_back(b.tau_l);
                if (b.tau_u <= horizon) times.push_back(b.tau_u);
            }
        }
        times.push_back(horizon);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        std::size_t next_sample = 0;

        auto sample_until = [&](double t_event) {
            while (next_sample < times.size() && times[next_sample] < t_event) {
                record_sample(tr, times[next_sample]);
                ++next_sample;
            }
        };
        auto sample_at = [&](double t) {
            record_sample(tr, t);
            while (next_sample < times.size() && times[next_sample] <= t) ++next_sample;
        };

        double t = t0_;
        std::optional<std::size_t> pending;
        for (std::size_t guard = 0;; ++guard) {
            if (guard > 1000000) throw NumericalError("run: event limit exceeded");
            if (pending) {
                TransmissionLog& log = tr.transmissions[*pending];
                const double rt = log.rec.r_tilde_k;
                if (rt > horizon) break;
                sample_until(rt);
                apply_update(log);
                pending.reset();
                t = rt;
                sample_at(t);
                continue;
            }
            const std::optional<double> fire = locate_trigger(t, horizon);
            if (!fire) break;
            sample_until(*fire);
            tr.transmissions.push_back(transmit(*fire, tr));
            if (tr.transmissions.size() > 1) {
                const auto& prev = tr.transmissions[tr.transmissions.size() - 2].rec;
                validate_transmission(tr.transmissions.back().rec, ch, prev.r_tilde_k);
            } else {
                validate_transmission(tr.transmissions.back().rec, ch);
            }
            pending = tr.transmissions.size() - 1;
            t = *fire;
            sample_at(t);
        }
        sample_until(std::numeric_limits<double>::infinity());

        if (sc_.sim.mode == Mode::Blackout) {
            for (std::size_t j = 0; j < ch.slot_count() && ch.theta(j) < horizon; ++j) {
                if (ch.is_blackout(j)) continue;
                if (const auto s = tracker_.artificial_blackout_start(j)) {
                    tr.artificial_blackouts.push_back({j, *s, ch.theta(j + 1), ch.rate(j)});
                }
            }
        }
        return tr;
    }

    // ---- pointwise quantities (exposed for audits) ---------------------

    struct Snapshot {
        double t = 0;
        Vector x, x_hat;
        double V = 0, Vd = 0, h_pf = 0, eps = 0, h_ch = 0, d_e = 0;
    };

    /// State at t >= last update time, from the closed-form propagation.
    [[nodiscard]] Snapshot snapshot(double t) const {
        Snapshot s;
        s.t = t;
        const auto nn = sc_.plant.n();
        const Matrix e = mat_exp(block_, t - anchor_t_);
        s.x = e.topLeftCorner(nn, nn) * anchor_x_ + e.topRightCorner(nn, nn) * anchor_xh_;
        s.x_hat = enc_.x_hat(t);
        s.d_e = enc_.d_e(t);
        s.V = sc_.plant.lyapunov_value(s.x);
        s.Vd = sc_.plant.desired_performance(t - t0_);
        s.h_pf = detail::safe_ratio(s.V, s.Vd);
        s.eps = detail::safe_ratio(s.d_e, sc_.plant.constants().c * std::sqrt(s.Vd));
        s.h_ch = s.eps / trig_.rho(s.h_pf);
        return s;
    }

private:
    static std::string num(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    /// L3 at t for the slot j in force on the chosen side; -inf when no
    /// blackout follows or j is itself a blackout.
    double l3_at(double t, double eps, std::size_t j) {
        const auto& ch = sc_.channel;
        if (ch.is_blackout(j)) return -std::numeric_limits<double>::infinity();
        const auto b = ch.next_blackout_after_slot(j);
        if (!b) return -std::numeric_limits<double>::infinity();
        const auto s_hat = tracker_.s_hat(t, j);
        return trig_.L3(t, eps, b->tau_l, b->length(), static_cast<double>(s_hat.value_or(0)));
    }

    bool predicate(double t) {
        const auto& ch = sc_.channel;
        const Snapshot s = snapshot(t);
        const std::size_t ja = ch.index(t, Side::At);
        const bool has_right = t < ch.end();
        const std::size_t jr = has_right ? ch.index(t, Side::Right) : ja;

        if (sc_.sim.mode == Mode::NoBlackout) {
            auto check = [&](std::size_t j) {
                const int cap = ch.cap(j);
                return trig_.L1(s.h_pf, s.eps, cap) >= 1.0 || trig_.L2(s.h_pf, s.eps, cap) >= 1.0;
            };
            return check(ja) || (jr != ja && check(jr));
        }

        if (tracker_.psi(t, ja) < 1) return false;
        auto check = [&](std::size_t j) {
            const double rate = ch.rate(j);
            const int psi = tracker_.psi(t, j);
            if (psi >= 1 || rate > 0.0) {
                if (trig_.L1_tilde(s.h_pf, s.eps, psi, rate) >= 1.0) return true;
                if (trig_.L2_tilde(s.h_pf, s.eps, psi, rate) >= 1.0) return true;
            }
            return l3_at(t, s.eps, j) >= 0.0;
        };
        return check(ja) || (jr != ja && check(jr));
    }

    /// First t in [from, until] where the trigger predicate holds.
    std::optional<double> locate_trigger(double from, double until) {
        const auto& ch = sc_.channel;
        std::vector<double> cand;
        const auto steps = static_cast<std::int64_t>(std::floor((until - from) / scan_step_));
        cand.reserve(static_cast<std::size_t>(steps) + 8);
        for (std::int64_t i = 0; i <= steps; ++i) cand.push_back(from + static_cast<double>(i) * scan_step_);
        cand.push_back(until);
        std::vector<double> explicit_pts;
        for (double th : ch.breakpoints()) {
            if (th > from && th <= until) explicit_pts.push_back(th);
        }
        if (sc_.sim.mode == Mode::Blackout) {
            for (std::size_t j = 0; j < ch.slot_count(); ++j) {
                if (ch.theta(j + 1) <= from || ch.theta(j) >= until) continue;
                if (const auto s = tracker_.artificial_blackout_start(j)) {
                    if (*s > from && *s <= until) explicit_pts.push_back(*s);
                }
            }
        }
        cand.insert(cand.end(), explicit_pts.begin(), explicit_pts.end());
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        std::sort(explicit_pts.begin(), explicit_pts.end());

        if (predicate(cand.front())) return cand.front();
        for (std::size_t i = 1; i < cand.size(); ++i) {
            if (!predicate(cand[i])) continue;
            double lo = cand[i - 1];
            double hi = cand[i];
            const double c = hi;
            while (hi - lo > sc_.sim.event_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (predicate(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if (hi == c && std::binary_search(explicit_pts.begin(), explicit_pts.end(), c)) {
                return c;  // the flip happens exactly at a breakpoint
            }
            // Fire at the last time the bounds were still below threshold,
            // unless the transmission guard is closed there.
            if (sc_.sim.mode == Mode::NoBlackout) return lo;
            const std::size_t j = ch.index(lo, Side::At);
            return tracker_.psi(lo, j) >= 1 ? lo : hi;
        }
        return std::nullopt;
    }

    /// Encodes and schedules the packet fired at tk.
    TransmissionLog transmit(double tk, SimTrace& tr) {
        const auto& ch = sc_.channel;
        const Snapshot s = snapshot(tk);
        const std::size_t j = ch.index(tk, Side::At);
        const double rate = ch.rate(j);
        const bool blackout_mode = sc_.sim.mode == Mode::Blackout;
        const int cap = blackout_mode ? tracker_.psi(tk, j) : ch.cap(j);

        std::optional<int> lower;
        for (int p = 1; p <= cap; ++p) {
            const double tau = blackout_mode ? trig_.t_m(p) : p / rate;
            const double v = blackout_mode ? trig_.h_ch_at_tm(p, s.h_pf, s.eps, p)
                                           : trig_.h_ch_bound_or_inf(tau, s.h_pf, s.eps, p);
            if (v <= 1.0) {
                lower = p;
                break;
            }
        }
        int p = 0;
        if (!lower) {
            const std::string msg = "no admissible packet size at t = " + num(tk) + " (cap " +
                                    std::to_string(cap) + ", h_pf = " + num(s.h_pf) +
                                    ", eps = " + num(s.eps) + ")";
            if (!opt_.force || cap < 1) throw GuaranteeBreach(msg);
            tr.violations.push_back(msg);
            p = cap;
        } else {
            p = sc_.sim.packet_policy == PacketPolicy::MaxBits ? cap : *lower;
        }

        TransmissionLog log;
        log.p_lower = lower.value_or(-1);
        log.cap = cap;
        log.h_pf_tk = s.h_pf;
        log.eps_tk = s.eps;
        if (inf_norm(Vector(s.x - s.x_hat)) > s.d_e) {
            tr.violations.push_back("|x - x_hat| exceeds d_e at transmission t = " + num(tk));
        }
        log.packet = enc_.encode(s.x, p, tk, !opt_.force);
        log.rec.t_k = tk;
        log.rec.p_k = p;
        log.rec.r_k = tk + sc_.sim.delay_factor * (static_cast<double>(p) / rate);
        log.rec.r_tilde_k = blackout_mode ? update_time(log.rec.r_k) : log.rec.r_k;
        return log;
    }

    /// r~ = inf{t >= r : psi(t) >= 1 or pbar(t) = 0}.
    double update_time(double r) {
        const auto& ch = sc_.channel;
        if (r >= ch.end()) return r;
        const std::size_t j = ch.index(r, Side::At);
        if (ch.is_blackout(j) || tracker_.psi(r, j) >= 1) return r;
        for (std::size_t i = j + 1; i < ch.slot_count(); ++i) {
            if (ch.is_blackout(i) || tracker_.psi(ch.theta(i), i) >= 1) return ch.theta(i);
        }
        return ch.end();
    }

    void apply_update(TransmissionLog& log) {
        const double rt = log.rec.r_tilde_k;
        const Snapshot pre = snapshot(rt);
        enc_.apply(log.packet, rt);
        dec_.apply(log.packet, rt);
        anchor_t_ = rt;
        anchor_x_ = pre.x;
        anchor_xh_ = enc_.x_hat(rt);
        if (!(dec_.x_hat(rt) == anchor_xh_) || dec_.d_e(rt) != enc_.d_e(rt)) {
            throw InvariantBreach("encoder and decoder replicas diverged");
        }
        const Snapshot post = snapshot(rt);
        log.applied = true;
        log.h_ch_update = post.h_ch;
        log.h_ch_update_bound = trig_.h_ch_bound_or_inf(rt - log.rec.t_k, log.h_pf_tk, log.eps_tk, log.rec.p_k);
    }

    void record_sample(SimTrace& tr, double t) {
        const auto& ch = sc_.channel;
        const Snapshot s = snapshot(t);
        Sample out;
        out.t = t;
        out.x = s.x;
        out.x_hat = s.x_hat;
        out.V = s.V;
        out.Vd = s.Vd;
        out.h_pf = s.h_pf;
        out.eps = s.eps;
        out.h_ch = s.h_ch;
        out.d_e = s.d_e;
        if (sc_.sim.mode == Mode::Blackout) {
            const std::size_t j = ch.index(t, Side::At);
            if (const auto ph = tracker_.phi(t, j)) out.Phi = static_cast<double>(*ph);
            out.psi = tracker_.psi(t, j);
            if (const auto sh = tracker_.s_hat(t, j); sh && !ch.is_blackout(j)) {
                out.S_hat = static_cast<double>(*sh);
            }
            const double l3 = l3_at(t, s.eps, j);
            if (std::isfinite(l3)) out.L3 = l3;

            for (const Blackout& b : ch.blackouts()) {
                if (t == b.tau_l) {
                    tr.blackout_checks.push_back({b.slot, b.tau_l, b.tau_u, s.eps,
                                                  trig_.epsilon_r(b.length()), std::nullopt});
                }
                if (t == b.tau_u) {
                    for (auto& chk : tr.blackout_checks) {
                        if (chk.slot == b.slot) chk.h_ch_at_end = s.h_ch;
                    }
                }
            }
        }
        const double err = inf_norm(Vector(s.x - s.x_hat));
        if (s.h_pf > 1.0) {
            const std::string msg = "h_pf = " + num(s.h_pf) + " > 1 at t = " + num(t);
            if (!opt_.force) throw ObjectiveViolation(msg);
            tr.violations.push_back(msg);
        }
        if (err > s.d_e) tr.violations.push_back("|x - x_hat| exceeds d_e at t = " + num(t));
        tr.samples.push_back(std::move(out));
    }

    const Scenario& sc_;
    Options opt_;
    Triggers trig_;
    CapacityTracker tracker_;
    Codec enc_;
    Codec dec_;
    double scan_step_ = 0;
    double t0_ = 0;
    Matrix block_;
    double anchor_t_ = 0;
    Vector anchor_x_, anchor_xh_;
};

[[nodiscard]] inline SimStats summarize(const SimTrace& tr, const ChannelSchedule& ch) {
    SimStats st;
    const auto& tx = tr.transmissions;
    st.count = tx.size();
    long long bits = 0;
    for (const auto& l : tx) bits += static_cast<long long>(tr.n) * l.rec.p_k;
    st.bits_per_time = static_cast<double>(bits) / (tr.horizon - tr.t0);
    if (tx.size() >= 2) {
        double sum = 0.0, mn = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < tx.size(); ++k) {
            const double d = tx[k].rec.t_k - tx[k - 1].rec.t_k;
            sum += d;
            mn = std::min(mn, d);
        }
        st.mean_interval = sum / static_cast<double>(tx.size() - 1);
        st.min_interval = mn;
    }
    std::vector<double> updates;
    for (const auto& l : tx) {
        if (l.applied) updates.push_back(l.rec.r_tilde_k);
    }
    if (updates.size() >= 2) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < updates.size(); ++k) mn = std::min(mn, updates[k] - updates[k - 1]);
        st.min_update_interval = mn;
    }
    st.max_h_pf = 0.0;
    st.min_de_margin = std::numeric_limits<double>::infinity();
    for (const auto& s : tr.samples) {
        st.max_h_pf = std::max(st.max_h_pf, s.h_pf);
        st.min_de_margin = std::min(st.min_de_margin, s.d_e - inf_norm(Vector(s.x - s.x_hat)));
    }
    if (tr.samples.empty()) st.min_de_margin = 0.0;

    std::vector<double> edges;  // window boundaries: blackout starts
    for (const Blackout& b : ch.blackouts()) {
        if (b.tau_l < tr.horizon) edges.push_back(b.tau_l);
    }
    st.bits_per_window.assign(edges.size() + 1, 0);
    for (const auto& l : tx) {
        const auto w = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), l.rec.t_k) - edges.begin());
        st.bits_per_window[w] += static_cast<long long>(tr.n) * l.rec.p_k;
    }
    return st;
}

}  // namespace evtrig
