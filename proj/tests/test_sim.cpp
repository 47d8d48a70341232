#include <gtest/gtest.h>

#include "support.hpp"

using namespace evtrig;
namespace t = evtrig::testing;

namespace {

std::string scenario_path(const std::string& name) { return std::string(EVTRIG_SCENARIO_DIR) + "/" + name; }

Scenario load(const std::string& name) { return build_scenario(load_scenario_file(scenario_path(name))); }

struct BenchmarkRun {
    Scenario sc = load("benchmark.json");
    SimTrace trace;
    BenchmarkRun() {
        Simulator sim(sc);
        trace = sim.run();
    }
};

const BenchmarkRun& benchmark() {
    static const BenchmarkRun r;
    return r;
}

Scenario constant_channel(double rate, int cap, Mode mode) {
    Scenario sc = load("benchmark.json");
    sc.channel = ChannelSchedule(std::vector<Slot>{{0, 10, rate, cap}});
    sc.sim.mode = mode;
    sc.sim.horizon = 10;
    return sc;
}

const Sample* sample_at(const SimTrace& tr, double tt) {
    for (const auto& s : tr.samples) {
        if (s.t == tt) return &s;
    }
    return nullptr;
}

}  // namespace

TEST(Admissibility, ExampleScenarioPasses) {
    const Scenario sc = load("benchmark.json");
    Simulator sim(sc);
    const auto rep = sim.check_admissibility();
    for (const auto& i : rep.items) EXPECT_TRUE(i.pass) << i.name << ": " << i.witness;
}

TEST(Admissibility, InitialTriggerFunctionsBelowOne) {
    const Scenario sc = load("benchmark.json");
    const Triggers tr(sc.plant, sc.trigger);
    const double h0 = sc.plant.lyapunov_value(sc.sim.x0) / sc.plant.vd0();
    const double e0 = sc.sim.d_e0 / (sc.plant.constants().c * std::sqrt(sc.plant.vd0()));
    EXPECT_NEAR(h0, 1.0 / 1.2, 1e-12);
    EXPECT_LE(tr.L1(h0, e0, sc.channel.cap(0)), 1.0);
    EXPECT_LE(tr.L2(h0, e0, sc.channel.cap(0)), 1.0);
}

TEST(Admissibility, ConstantFastChannelPasses) {
    const Scenario sc = constant_channel(1e5, 8, Mode::NoBlackout);
    Simulator sim(sc);
    EXPECT_TRUE(sim.check_admissibility().ok());
}

TEST(Admissibility, LongBlackoutFails) {
    const Scenario sc = load("long_blackout.json");
    Simulator sim(sc);
    const auto rep = sim.check_admissibility();
    EXPECT_FALSE(rep.ok());
    bool named = false;
    for (const auto& i : rep.items) {
        if (!i.pass) named = named || i.witness.find("slot 1") != std::string::npos;
    }
    EXPECT_TRUE(named);
}

TEST(Admissibility, SlowChannelFails) {
    const Scenario sc = constant_channel(100.0, 8, Mode::NoBlackout);
    Simulator sim(sc);
    EXPECT_FALSE(sim.check_admissibility().ok());
}

TEST(Run, EquilibriumNeverTransmits) {
    Scenario sc = load("benchmark.json");
    sc.sim.x0 = Vector::Zero(2);
    sc.sim.x_hat0 = Vector::Zero(2);
    sc.sim.d_e0 = 0.0;
    sc.plant = t::benchmark_plant(1.0);
    sc.sim.sample_step = 0.05;
    Simulator sim(sc);
    const SimTrace tr = sim.run();
    EXPECT_TRUE(tr.transmissions.empty());
    for (const auto& s : tr.samples) {
        EXPECT_EQ(s.V, 0.0);
        EXPECT_LE(s.V, s.Vd);
    }
}

TEST(Run, NoBlackoutConstantChannel) {
    Scenario sc = constant_channel(1e5, 8, Mode::NoBlackout);
    Simulator sim(sc);
    const SimTrace tr = sim.run();
    const SimStats st = summarize(tr, sc.channel);
    ASSERT_GE(st.count, 2u);
    EXPECT_GT(*st.min_interval, 0.0);
    for (const auto& s : tr.samples) EXPECT_LE(s.V, s.Vd) << "t = " << s.t;
}

TEST(Run, ExampleObjectiveHolds) {
    const auto& r = benchmark();
    ASSERT_FALSE(r.trace.samples.empty());
    EXPECT_TRUE(r.trace.violations.empty());
    for (const auto& s : r.trace.samples) {
        EXPECT_LE(s.V, s.Vd) << "t = " << s.t;
        EXPECT_LE(s.h_pf, 1.0);
        EXPECT_LE(inf_norm(Vector(s.x - s.x_hat)), s.d_e) << "t = " << s.t;
    }
    EXPECT_EQ(r.trace.samples.back().t, 20.0);
}

TEST(Run, BlackoutReadiness) {
    const auto& r = benchmark();
    ASSERT_EQ(r.trace.blackout_checks.size(), 3u);
    for (const auto& b : r.trace.blackout_checks) {
        EXPECT_LE(b.eps_at_start, b.eps_r) << "blackout at " << b.tau_l;
        ASSERT_TRUE(b.h_ch_at_end.has_value());
        EXPECT_LE(*b.h_ch_at_end, 1.0);
    }
}

TEST(Run, TransmissionFeasibility) {
    const auto& r = benchmark();
    const auto& ch = r.sc.channel;
    std::optional<double> prev;
    for (const auto& l : r.trace.transmissions) {
        EXPECT_NO_THROW(validate_transmission(l.rec, ch, prev));
        prev = l.rec.r_tilde_k;
        EXPECT_LE(l.rec.p_k, l.cap);
        EXPECT_GE(l.rec.p_k, 1);
        EXPECT_GE(l.rec.p_k, l.p_lower);
        const std::size_t j = ch.index(l.rec.t_k, Side::At);
        EXPECT_FALSE(ch.is_blackout(j));
        for (const auto& ab : r.trace.artificial_blackouts) {
            EXPECT_FALSE(l.rec.t_k > ab.start && l.rec.t_k <= ab.end) << "t_k = " << l.rec.t_k;
        }
    }
}

TEST(Run, PostUpdateErrorInsideBox) {
    const auto& r = benchmark();
    int updates = 0;
    for (const auto& l : r.trace.transmissions) {
        if (!l.applied) continue;
        const Sample* s = sample_at(r.trace, l.rec.r_tilde_k);
        ASSERT_NE(s, nullptr);
        EXPECT_LE(inf_norm(Vector(s->x - s->x_hat)), s->d_e);
        EXPECT_LE(l.h_ch_update, l.h_ch_update_bound * (1 + 1e-9));
        ++updates;
    }
    EXPECT_GT(updates, 5);
}

TEST(Run, RealtimeBoundAfterSend) {
    const auto& r = benchmark();
    const auto& ch = r.sc.channel;
    int checked = 0;
    for (const auto& l : r.trace.transmissions) {
        if (!l.applied) continue;
        const Sample* a = sample_at(r.trace, l.rec.t_k);
        const Sample* b = sample_at(r.trace, l.rec.r_tilde_k);
        ASSERT_TRUE(a && b);
        if (!a->S_hat || !b->S_hat) continue;
        if (ch.index(l.rec.t_k, Side::At) != ch.index(l.rec.r_tilde_k, Side::At)) continue;
        EXPECT_GE(*b->S_hat, *a->S_hat - 2.0 * l.rec.p_k);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(Run, L3MatchesRecomputation) {
    const auto& r = benchmark();
    const Triggers tr(r.sc.plant, r.sc.trigger);
    const auto& c = r.sc.plant.constants();
    int checked = 0;
    for (const auto& s : r.trace.samples) {
        if (!s.L3 || !s.S_hat || s.t < 8.0 || s.t > 11.0) continue;
        const auto b = r.sc.channel.next_blackout(s.t);
        ASSERT_TRUE(b.has_value());
        const double eps = s.d_e / (c.c * std::sqrt(s.Vd));
        const double want = 2.0 * (std::log2(std::exp(c.mu_bar * (b->tau_l - s.t)) * eps / epsilon_r(c, b->length()))) -
                            0.8 * *s.S_hat;
        EXPECT_NEAR(*s.L3, want, 1e-6 * std::max(1.0, std::abs(want)));
        EXPECT_NEAR(*s.L3, tr.L3(s.t, s.eps, b->tau_l, b->length(), *s.S_hat), 1e-9 * std::max(1.0, std::abs(want)));
        ++checked;
    }
    EXPECT_GT(checked, 100);
}

TEST(Run, Deterministic) {
    const Scenario sc = load("benchmark.json");
    Simulator a(sc), b(sc);
    const SimTrace ta = a.run(), tb = b.run();
    ASSERT_EQ(ta.samples.size(), tb.samples.size());
    ASSERT_EQ(ta.transmissions.size(), tb.transmissions.size());
    for (std::size_t i = 0; i < ta.samples.size(); ++i) {
        EXPECT_EQ(ta.samples[i].t, tb.samples[i].t);
        EXPECT_TRUE(ta.samples[i].x == tb.samples[i].x);
        EXPECT_EQ(ta.samples[i].d_e, tb.samples[i].d_e);
    }
    for (std::size_t k = 0; k < ta.transmissions.size(); ++k) {
        EXPECT_EQ(ta.transmissions[k].rec.t_k, tb.transmissions[k].rec.t_k);
        EXPECT_EQ(ta.transmissions[k].packet.symbols, tb.transmissions[k].packet.symbols);
    }
}

TEST(Run, EventTimesStableUnderRefinement) {
    Scenario sc = load("benchmark.json");
    sc.sim.horizon = 6.88;
    sc.sim.sample_step = 0.05;
    Simulator coarse(sc);
    const double step = coarse.scan_step();
    const SimTrace a = coarse.run();
    sc.sim.scan_step = step / 2;
    Simulator fine(sc);
    const SimTrace b = fine.run();
    ASSERT_EQ(a.transmissions.size(), b.transmissions.size());
    for (std::size_t k = 0; k < a.transmissions.size(); ++k) {
        EXPECT_LT(std::abs(a.transmissions[k].rec.t_k - b.transmissions[k].rec.t_k), 2 * step) << "k = " << k;
    }
}

TEST(Run, ForcedInadmissibleRunRecordsViolations) {
    const Scenario sc = load("long_blackout.json");
    Simulator sim(sc, SimOptions{true});
    const SimTrace tr = sim.run();
    EXPECT_FALSE(tr.violations.empty());
    Simulator strict(sc);
    EXPECT_THROW((void)strict.run(), Error);
}

TEST(Run, RejectsBadConfiguration) {
    Scenario sc = load("benchmark.json");
    sc.sim.d_e0 = 1.0;  // below |x0 - x_hat0|
    EXPECT_THROW(Simulator{sc}, ConfigError);
    sc = load("benchmark.json");
    sc.sim.horizon = 25.0;
    EXPECT_THROW(Simulator{sc}, ConfigError);
    sc = load("benchmark.json");
    sc.sim.delay_factor = 1.5;
    EXPECT_THROW(Simulator{sc}, ConfigError);
}

TEST(Run, DelayFactorAndPolicyVariants) {
    for (const char* name : {"batch/benchmark_half_delay.json", "batch/benchmark_min_bits.json"}) {
        const Scenario sc = load(name);
        Simulator sim(sc);
        ASSERT_TRUE(sim.check_admissibility().ok()) << name;
        const SimTrace tr = sim.run();
        EXPECT_TRUE(tr.violations.empty()) << name;
        for (const auto& s : tr.samples) ASSERT_LE(s.h_pf, 1.0) << name << " t = " << s.t;
        for (const auto& l : tr.transmissions) {
            if (sc.sim.packet_policy == PacketPolicy::MinBits) EXPECT_EQ(l.rec.p_k, l.p_lower);
            EXPECT_LE(l.rec.r_k - l.rec.t_k, sc.sim.delay_factor * l.rec.p_k / sc.channel.rate_at(l.rec.t_k) + 1e-12);
        }
    }
}

TEST(Summarize, NoTransmissions) {
    SimTrace tr;
    tr.t0 = 0;
    tr.horizon = 4;
    tr.n = 2;
    const SimStats st = summarize(tr, ChannelSchedule(std::vector<Slot>{{0, 4, 1, 1}}));
    EXPECT_EQ(st.count, 0u);
    EXPECT_FALSE(st.mean_interval.has_value());
    EXPECT_FALSE(st.min_interval.has_value());
    EXPECT_EQ(st.bits_per_time, 0.0);
}

TEST(Summarize, Arithmetic) {
    SimTrace tr;
    tr.t0 = 0;
    tr.horizon = 4;
    tr.n = 2;
    TransmissionLog a, b;
    a.rec = {1.0, 4, 1.1, 1.1};
    b.rec = {3.0, 4, 3.1, 3.1};
    a.applied = b.applied = true;
    tr.transmissions = {a, b};
    const SimStats st = summarize(tr, ChannelSchedule(std::vector<Slot>{{0, 4, 10, 4}}));
    EXPECT_EQ(st.count, 2u);
    EXPECT_DOUBLE_EQ(*st.mean_interval, 2.0);
    EXPECT_DOUBLE_EQ(st.bits_per_time, 4.0);
    EXPECT_DOUBLE_EQ(*st.min_update_interval, 2.0);
}

TEST(Summarize, ExampleStatisticsInBand) {
    const auto& r = benchmark();
    const SimStats st = summarize(r.trace, r.sc.channel);
    EXPECT_GE(st.count, 8u);
    EXPECT_LE(st.count, 32u);
    EXPECT_GE(*st.mean_interval, 0.6);
    EXPECT_LE(*st.mean_interval, 2.5);
    EXPECT_GE(st.bits_per_time, 5.0);
    EXPECT_LE(st.bits_per_time, 25.0);
}
