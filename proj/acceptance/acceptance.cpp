// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support.hpp"

using namespace evtrig;
namespace t = evtrig::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string path(const std::string& name) { return std::string(EVTRIG_SCENARIO_DIR) + "/" + name; }

Scenario load(const std::string& name) { return build_scenario(load_scenario_file(path(name))); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

AllocationProblem problem(std::vector<Slot> slots, int n) {
    AllocationProblem p;
    p.slots = std::move(slots);
    p.n = n;
    return p;
}

Outcome lyapunov_certificate() {
    const PlantModel pm = t::benchmark_plant();
    Matrix want(2, 2);
    want << 2.25, -0.9167, -0.9167, 0.5833;
    const double p_err = (pm.P() - want).cwiseAbs().maxCoeff();
    Eigen::EigenSolver<Matrix> es(Matrix(t::benchmark_A() + t::benchmark_B() * t::benchmark_K()), false);
    std::vector<double> ev;
    double imag = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        ev.push_back(es.eigenvalues()(i).real());
        imag = std::max(imag, std::abs(es.eigenvalues()(i).imag()));
    }
    std::sort(ev.begin(), ev.end());
    const double e_err = std::max({std::abs(ev[0] + 2.0), std::abs(ev[1] + 1.0), imag});
    return {p_err <= 1e-3 && e_err <= 1e-9, fmt("max |P - P_ref| = %.2e, eigenvalue error = %.2e", p_err, e_err)};
}

Outcome threshold_constant() {
    const PlantModel pm = t::benchmark_plant();
    const double g = Triggers::gamma11(pm.constants());
    return {std::abs(g - 0.5699) <= 1e-3, fmt("Gamma1(1,1) = %.9f", g)};
}

Outcome constant_capacity() {
    t::Gen g(1001);
    ExactLimits lim;
    lim.max_per_slot = 200;
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double r = g.uniform(0.5, 8.0);
        const int n = g.integer(1, 4);
        const int k = g.integer(1, 4);
        double tt = g.uniform(0.0, 5.0);
        const double t1 = tt;
        std::vector<Slot> s;
        for (int j = 0; j < k; ++j) {
            const double len = g.uniform(0.2, 2.5);
            s.push_back({tt, tt + len, r, g.integer(1, 5)});
            tt += len;
        }
        const long long want = n * static_cast<long long>(std::floor(r * (tt - t1) + 1e-9));
        if (capacity_exact(problem(s, n), lim).value_bits != want) ++bad;
    }
    return {bad == 0, fmt("%g of 200 instances differ from n*floor(R*(tau2 - tau1))", bad)};
}

Outcome lp_certificate() {
    t::Gen g(1002);
    int done = 0, bad = 0;
    double worst = 0;
    while (done < 100) {
        const int n = g.integer(1, 3);
        const auto slots = g.slots(g.integer(1, 6), 0.5, 4.0, 0.3, 2.0, 3, 0.25);
        const ChannelSchedule ch(slots);
        const auto j = ch.compute_J(0, ch.slot_count());
        const auto p = problem(slots, n);
        if (!j || *j != 0 || !spill_free(p)) continue;
        ++done;
        const long long c = capacity_exact(p).value_bits;
        const long long s = capacity_plan(p).value_bits;
        long long usable = 0;
        for (const Slot& sl : slots) usable += sl.pi_bar > 0 ? 1 : 0;
        if (c - s < 0 || c - s > n * usable) ++bad;
        worst = std::max(worst, static_cast<double>(c - s) / std::max<long long>(1, n * usable));
    }
    return {bad == 0, fmt("%g of 100 violate 0 <= C - S <= n*usable; worst ratio %.3f", bad, worst)};
}

Outcome realtime_bound_check() {
    t::Gen g(1003);
    int done = 0, bad = 0;
    while (done < 100) {
        const int n = g.integer(1, 3);
        const auto p = problem(g.slots(g.integer(1, 5), 0.5, 4.0, 0.3, 2.0, 3, 0.25), n);
        if (!spill_free(p) || p.slots.front().pi_bar == 0) continue;
        ++done;
        const auto plan = capacity_plan(p);
        const Slot& first = p.slots.front();
        for (int k = 0; k < 10; ++k) {
            const double tt = g.uniform(first.theta_start, first.theta_end);
            AllocationProblem rest = p;
            rest.slots.front().theta_start = tt;
            if (!(rest.slots.front().theta_end > tt)) continue;
            const long long gap = capacity_plan(rest).value_bits - realtime_bound(plan, tt);
            if (gap < 0 || gap > n) ++bad;
        }
    }
    return {bad == 0, fmt("%g of 1000 samples violate 0 <= S - S_hat <= n", bad)};
}

struct Runs {
    std::vector<std::pair<std::string, Scenario>> scenarios;
    std::vector<SimTrace> traces;
};

const Runs& benchmark_runs() {
    static const Runs r = [] {
        Runs out;
        for (const char* name : {"benchmark.json", "batch/benchmark_half_delay.json", "batch/benchmark_min_bits.json"}) {
            out.scenarios.emplace_back(name, load(name));
            Simulator sim(out.scenarios.back().second);
            out.traces.push_back(sim.run());
        }
        return out;
    }();
    return r;
}

Outcome artificial_blackouts() {
    const Runs& r = benchmark_runs();
    int seen = 0, bad = 0;
    double worst = 0;
    for (const auto& tr : r.traces) {
        for (const auto& ab : tr.artificial_blackouts) {
            ++seen;
            const double ratio = (ab.end - ab.start) * ab.rate / 2.0;
            worst = std::max(worst, ratio);
            if (!(ratio < 1.0)) ++bad;
        }
    }
    return {bad == 0, fmt("%g artificial blackouts over 3 runs, %g too long, worst length*R/2 = %.3f", seen, bad, worst)};
}

Outcome closed_loop_safety() {
    const SimTrace& tr = benchmark_runs().traces[0];
    int bad_h = 0, bad_e = 0, bad_b = 0;
    double max_h = 0;
    for (const auto& s : tr.samples) {
        max_h = std::max(max_h, s.h_pf);
        if (!(s.h_pf <= 1.0)) ++bad_h;
        if (!(inf_norm(Vector(s.x - s.x_hat)) <= s.d_e)) ++bad_e;
    }
    for (const auto& b : tr.blackout_checks) {
        if (!(b.eps_at_start <= b.eps_r)) ++bad_b;
    }
    const bool ok = bad_h == 0 && bad_e == 0 && bad_b == 0 && tr.blackout_checks.size() == 3 && tr.violations.empty();
    return {ok, fmt("h_pf violations %g (max %.4f), codec violations %g", bad_h, max_h, bad_e) +
                    fmt(", blackout-start violations %g of %g", bad_b, static_cast<double>(tr.blackout_checks.size()))};
}

Outcome statistics_bands() {
    const auto& r = benchmark_runs();
    const SimStats st = summarize(r.traces[0], r.scenarios[0].second.channel);
    const double mean = st.mean_interval.value_or(0.0);
    const bool ok = st.count >= 8 && st.count <= 32 && mean >= 0.6 && mean <= 2.5 && st.bits_per_time >= 5.0 &&
                    st.bits_per_time <= 25.0;
    return {ok, fmt("count %g, mean interval %.4f, bits per unit time %.3f", static_cast<double>(st.count), mean,
                    st.bits_per_time)};
}

Outcome non_zeno() {
    Scenario sc = load("benchmark.json");
    const double base = Simulator(sc).scan_step();
    double first = 0, drift = 0;
    std::string detail;
    for (int halvings = 0; halvings <= 2; ++halvings) {
        sc.sim.scan_step = base / (1 << halvings);
        Simulator sim(sc);
        const SimStats st = summarize(sim.run(), sc.channel);
        const double m = st.min_interval.value_or(0.0);
        if (halvings == 0) first = m;
        drift = std::max(drift, std::abs(m - first));
        detail += fmt(halvings == 0 ? "min interval %.6g" : " / %.6g", m);
    }
    return {first > 0.0 && drift < 2.0 * base, detail + fmt(", drift %.3g vs 2*scan_step %.3g", drift, 2.0 * base)};
}

Outcome trigger_bounds() {
    const auto& r = benchmark_runs();
    long long checks = 0, bad_pf = 0, bad_ch = 0;
    double worst = 0;
    for (std::size_t i = 0; i < r.traces.size(); ++i) {
        const SimTrace& tr = r.traces[i];
        const Triggers trig(r.scenarios[i].second.plant, r.scenarios[i].second.trigger);
        // Open-loop segments start at t0 and at every applied update.
        std::vector<double> cuts{tr.t0};
        for (const auto& l : tr.transmissions) {
            if (l.applied) cuts.push_back(l.rec.r_tilde_k);
            if (l.applied && !(l.h_ch_update <= l.h_ch_update_bound)) ++bad_ch;
        }
        cuts.push_back(std::numeric_limits<double>::infinity());
        std::size_t a = 0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            while (a < tr.samples.size() && tr.samples[a].t < cuts[c]) ++a;
            std::size_t b = a;
            while (b < tr.samples.size() && tr.samples[b].t < cuts[c + 1]) ++b;
            for (std::size_t u = a; u < b; ++u) {
                const Sample& s0 = tr.samples[u];
                if (s0.h_pf > 1.0) continue;
                for (std::size_t v = u; v < b; ++v) {
                    const Sample& s1 = tr.samples[v];
                    const double bound = trig.h_pf_bound(s1.t - s0.t, s0.h_pf, s0.eps);
                    ++checks;
                    worst = std::max(worst, s1.h_pf - bound);
                    if (s1.h_pf > bound * (1.0 + 1e-12)) ++bad_pf;
                }
            }
            a = b;
        }
    }
    return {bad_pf == 0 && bad_ch == 0,
            fmt("%g pairwise h_pf checks, %g above h_pf_bound, ", static_cast<double>(checks),
                static_cast<double>(bad_pf)) +
                fmt("%g updates above h_ch bound; worst excess %.2e", static_cast<double>(bad_ch), worst)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria = {
        {"1 Lyapunov certificate", lyapunov_certificate, 1},
        {"2 Threshold constant Gamma1(1,1)", threshold_constant, 1},
        {"3 Constant-channel capacity", constant_capacity, 10},
        {"4 LP sub-optimality certificate", lp_certificate, 60},
        {"5 Real-time capacity bound", realtime_bound_check, 60},
        {"6 Artificial blackout length", artificial_blackouts, 0},
        {"7 Closed-loop safety", closed_loop_safety, 30},
        {"8 Statistics bands", statistics_bands, 0},
        {"9 Non-Zeno stability", non_zeno, 0},
        {"10 Trigger-bound soundness", trigger_bounds, 0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt("; runtime %.2f s over budget %.0f s", secs, c.budget_s);
        }
        if (!o.pass) ++failed;
        std::printf("%s  %-36s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
