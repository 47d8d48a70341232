#include <gtest/gtest.h>

#include "support.hpp"

using namespace evtrig;
namespace t = evtrig::testing;

namespace {

struct Fixture {
    PlantModel pm = t::benchmark_plant();
    TriggerConfig cfg = t::benchmark_trigger(pm);
    Triggers tr{pm, cfg};
    const DerivedConstants& c = pm.constants();
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

// Independent closed forms used as oracles.
double rho_oracle(const DerivedConstants& c, double T, double h0) {
    const double s = c.w + c.mu;
    return 1.0 + s * (1.0 - h0) / (c.W * (std::exp(s * T) - 1.0));
}

double hpf_oracle(const DerivedConstants& c, double tau, double h0, double eps0) {
    const double k = c.W * eps0 / (c.w + c.mu);
    return (h0 - k) * std::exp(-c.w * tau) + k * std::exp(c.mu * tau);
}

double hch_oracle(const Fixture& f, double tau, double h0, double eps0, int p) {
    const double growth = inf_norm(t::taylor_exp(f.pm.A(), tau)) * std::exp(f.pm.beta() * tau / 2);
    return growth * eps0 / (rho_oracle(f.c, f.cfg.T, hpf_oracle(f.c, tau, h0, eps0)) * std::pow(2.0, p));
}

/// Gamma2 by scan-and-bisect on the channel bound, treating h_pf > 1 as a crossing.
double gamma2_oracle(const Fixture& f, double h0, double eps0, int p, double hi) {
    return t::first_crossing(
        [&](double tau) {
            if (hpf_oracle(f.c, tau, h0, eps0) > 1.0) return 2.0;
            return hch_oracle(f, tau, h0, eps0, p);
        },
        hi);
}

}  // namespace

TEST(HpfBound, AtZeroAndPureDecay) {
    const auto& c = fx().c;
    EXPECT_DOUBLE_EQ(h_pf_bound(c, 0.0, 0.7, 0.3), 0.7);
    for (double tau : {0.1, 0.5, 2.0}) {
        EXPECT_NEAR(h_pf_bound(c, tau, 0.8, 0.0), 0.8 * std::exp(-c.w * tau), 1e-15);
        EXPECT_NEAR(h_pf_bound(c, tau, 0.8, 0.4), hpf_oracle(c, tau, 0.8, 0.4), 1e-12);
    }
}

TEST(HpfBound, ThresholdCrossing) { EXPECT_NEAR(h_pf_bound(fx().c, 0.5699, 1.0, 1.0), 1.0, 2e-3); }

TEST(Gamma1, UnitArguments) {
    const auto g = gamma1(fx().c, 1.0, 1.0, 1e-4);
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(*g, 0.5699, 1e-3);
    EXPECT_NEAR(*g, 0.569850838, 1e-8);
    EXPECT_NEAR(fx().tr.gamma1_11(), *g, 1e-9);
}

TEST(Gamma1, PureDecayIsUnbounded) {
    EXPECT_FALSE(gamma1(fx().c, 0.5, 0.0, 1e-3).has_value());
    EXPECT_FALSE(gamma1(fx().c, 1.0, 0.0, 1e-3).has_value());
}

TEST(Gamma1, StartAtThresholdWithPositiveSlope) {
    // h0 = 1 and a large eps0 give a nonnegative slope at 0.
    const auto g = gamma1(fx().c, 1.0, 1000.0, 1e-4);
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(*g, 0.0);
}

TEST(Gamma1, MonotoneInArguments) {
    const auto& c = fx().c;
    const std::vector<double> hs{0.0, 0.2, 0.5, 0.8, 1.0};
    const std::vector<double> es{0.05, 0.2, 0.5, 1.0, 3.0, 10.0};
    for (double h0 : hs) {
        for (double h1 : hs) {
            if (h1 < h0) continue;
            for (double e0 : es) {
                for (double e1 : es) {
                    if (e1 < e0) continue;
                    const double g0 = gamma1(c, h0, e0, 1e-3).value();
                    const double g1 = gamma1(c, h1, e1, 1e-3).value();
                    EXPECT_GE(g0, g1 - 1e-8) << h0 << ' ' << e0 << ' ' << h1 << ' ' << e1;
                }
            }
        }
    }
    for (double e : es) EXPECT_GE(gamma1(c, 0.5, e, 1e-3).value(), gamma1(c, 1.0, e, 1e-3).value());
}

TEST(Gamma1, RhoThresholdProperty) {
    const auto& f = fx();
    const double floor = std::min(f.tr.gamma1_11(), f.cfg.T);
    for (double h0 = 0.0; h0 <= 1.0; h0 += 0.05) {
        const double r = f.tr.rho(h0);
        for (double frac : {0.0, 0.1, 0.5, 0.9, 1.0}) {
            const double e0 = frac * r;
            const auto g = f.tr.gamma1(h0, e0);
            if (!g) continue;
            EXPECT_GE(*g, floor - 1e-8) << h0 << ' ' << e0;
        }
    }
}

TEST(Rho, Values) {
    const auto& c = fx().c;
    EXPECT_DOUBLE_EQ(rho(c, 0.05699, 1.0), 1.0);
    const double r0 = rho(c, 0.05699, 0.0);
    EXPECT_GT(r0, 1.0);
    EXPECT_NEAR(r0, rho_oracle(c, 0.05699, 0.0), 1e-10 * r0);
    EXPECT_GT(rho(c, 0.05699, 0.2), rho(c, 0.05699, 0.8));
    EXPECT_THROW((void)rho(c, 0.0, 0.5), DomainError);
}

TEST(HchBound, ZeroTimeAndBitHalving) {
    const auto& f = fx();
    EXPECT_NEAR(f.tr.h_ch_bound(0.0, 0.4, 0.3, 3), 0.3 / (f.tr.rho(0.4) * 8.0), 1e-15);
    for (int p = 0; p < 10; ++p) {
        EXPECT_EQ(f.tr.h_ch_bound(0.02, 0.5, 0.5, p + 1), 0.5 * f.tr.h_ch_bound(0.02, 0.5, 0.5, p));
    }
}

TEST(HchBound, CompositionalOracle) {
    const auto& f = fx();
    const double got = f.tr.h_ch_bound(0.01, 0.5, 0.5, 4);
    EXPECT_NEAR(got, hch_oracle(f, 0.01, 0.5, 0.5, 4), 1e-10 * got);
}

TEST(HchBound, PerformanceGuard) {
    const auto& f = fx();
    EXPECT_THROW((void)f.tr.h_ch_bound(10.0, 1.0, 1.0, 0), DomainError);
    EXPECT_TRUE(std::isinf(f.tr.h_ch_bound_or_inf(10.0, 1.0, 1.0, 0)));
}

TEST(Gamma2, LargePacketAlwaysExceeds) {
    const auto& f = fx();
    EXPECT_TRUE(f.tr.gamma2_exceeds(0.5, 0.5 * f.tr.rho(0.5), 60, 0.01));
}

TEST(Gamma2, BoundaryStrictness) {
    const auto& f = fx();
    const double h0 = 0.3;
    const double e0 = f.tr.rho(h0);
    EXPECT_FALSE(f.tr.gamma2_exceeds(h0, e0, 0, 0.0, true));
    EXPECT_TRUE(f.tr.gamma2_exceeds(h0, e0, 0, 0.0, false));
}

TEST(Gamma2, AgreesWithBisectionOracle) {
    const auto& f = fx();
    int checked = 0;
    for (double h0 : {0.1, 0.4, 0.7, 0.95}) {
        for (double frac : {0.2, 0.6, 1.0}) {
            const double e0 = frac * f.tr.rho(h0);
            for (int p : {0, 1, 3, 6}) {
                const double root = gamma2_oracle(f, h0, e0, p, 0.5);
                for (double to : {0.001, 0.005, 0.02, 0.05, 0.1, 0.3}) {
                    if (std::abs(to - root) < 1e-7) continue;
                    EXPECT_EQ(f.tr.gamma2_exceeds(h0, e0, p, to), root > to)
                        << h0 << ' ' << e0 << ' ' << p << ' ' << to << " root " << root;
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Gamma2, LowerBoundedByTStar) {
    const auto& f = fx();
    for (double h0 : {0.0, 0.3, 0.6, 0.9, 1.0}) {
        for (double frac : {0.0, 0.3, 0.7, 1.0}) {
            const double e0 = frac * f.tr.rho(h0);
            for (int p = 1; p <= 8; ++p) {
                const double root = gamma2_oracle(f, h0, e0, p, f.cfg.T);
                EXPECT_GE(root, f.tr.t_star(p) - 1e-9) << h0 << ' ' << e0 << ' ' << p;
            }
        }
    }
}

TEST(TStar, ZeroBits) { EXPECT_EQ(fx().tr.t_star(0), 0.0); }

TEST(TStar, IncreasingAndSelfCertifying) {
    const auto& f = fx();
    for (int p = 1; p < 8; ++p) EXPECT_GT(f.tr.t_star(p + 1), f.tr.t_star(p));
    const double r4 = f.tr.t_star(4);
    // g is steep near its root, so the residual is judged on a root_tol bracket.
    EXPECT_LE(f.tr.g(r4 - f.cfg.root_tol, 4), 1.0);
    EXPECT_GE(f.tr.g(r4 + f.cfg.root_tol, 4), 1.0);
    EXPECT_NEAR(f.tr.g(r4, 4), 1.0, 1e-6);
    // Direct oracle on the defining equation.
    auto g = [&](double tau) {
        const double s = f.c.w + f.c.mu;
        const double growth = inf_norm(t::taylor_exp(f.pm.A(), tau)) * std::exp(f.pm.beta() * tau / 2);
        return growth / 16.0 * std::expm1(s * f.cfg.T) / (std::expm1(s * f.cfg.T) - std::expm1(s * tau));
    };
    EXPECT_NEAR(t::first_crossing(g, f.cfg.T), r4, 1e-8);
}

TEST(TStar, FrozenValues) {
    const auto& f = fx();
    const double want[] = {0.02631761, 0.04104203, 0.04885198, 0.05287691,
                           0.05492043, 0.05595010, 0.05646692, 0.05672584};
    for (int p = 1; p <= 8; ++p) EXPECT_NEAR(f.tr.t_star(p), want[p - 1], 1e-8) << p;
    // Beyond the table the value is computed on demand; it is nondecreasing and saturates below T.
    EXPECT_GT(f.tr.t_star(9), f.tr.t_star(8));
    EXPECT_GE(f.tr.t_star(70), f.tr.t_star(64));
    EXPECT_LT(f.tr.t_star(70), f.cfg.T);
}

TEST(TM, Formula) {
    const auto& f = fx();
    const double want[] = {0.00157906, 0.00246252, 0.00293112, 0.00317261,
                           0.00329523, 0.00335701, 0.00338802, 0.00340355};
    for (int p = 1; p <= 8; ++p) {
        EXPECT_DOUBLE_EQ(f.tr.t_m(p), 0.06 * std::min({f.tr.gamma1_11(), f.cfg.T, f.tr.t_star(p)}));
        EXPECT_NEAR(f.tr.t_m(p), want[p - 1], 1e-8) << p;
    }
    EXPECT_THROW((void)f.tr.t_m(0), DomainError);
}

TEST(TM, MonotoneAndSaturating) {
    const auto& f = fx();
    for (int p = 1; p < 64; ++p) EXPECT_GE(f.tr.t_m(p + 1), f.tr.t_m(p));
    EXPECT_LE(f.tr.t_m(64), 0.06 * std::min(f.tr.gamma1_11(), f.cfg.T));
    EXPECT_NEAR(f.tr.t_m(64), 0.06 * std::min(f.tr.gamma1_11(), f.cfg.T), 1e-9);
}

TEST(TM, VanishesWithSigma) {
    TriggerConfig cfg = fx().cfg;
    for (double s : {1e-2, 1e-4, 1e-8}) {
        cfg.sigma = s;
        const Triggers tr(fx().pm, cfg);
        EXPECT_LE(tr.t_m(5), s * cfg.T);
    }
}

TEST(EpsilonR, SmallBlackoutLimit) {
    const auto& c = fx().c;
    EXPECT_NEAR(c.w / c.W, 5.0, 1e-9);
    EXPECT_NEAR(epsilon_r(c, 1e-8), 1.0, 1e-6);
}

TEST(EpsilonR, RegressionValue) {
    const auto& c = fx().c;
    const double first = (std::exp(c.w * 2.0) - 1.0) * (c.w + c.mu) / (c.W * (std::exp((c.w + c.mu) * 2.0) - 1.0));
    const double oracle = std::min(first, std::exp(-c.mu_bar * 2.0));
    EXPECT_NEAR(epsilon_r(c, 2.0), oracle, 1e-15);
    EXPECT_NEAR(epsilon_r(c, 2.0), 3.359071452e-05, 1e-13);
    EXPECT_GT(epsilon_r(c, 1.0), epsilon_r(c, 2.0));
    EXPECT_THROW((void)epsilon_r(c, 0.0), DomainError);
}

TEST(TriggerFunctions, ZeroErrorBound) {
    const auto& f = fx();
    for (int cap : {1, 4, 8}) {
        EXPECT_EQ(f.tr.L2(0.6, 0.0, cap), 0.0);
        EXPECT_NEAR(f.tr.L1(0.6, 0.0, cap), 0.6 * std::exp(-f.c.w * f.tr.t_m(cap)), 1e-15);
    }
    EXPECT_THROW((void)f.tr.L1(0.6, 0.0, 0), DomainError);
}

TEST(TriggerFunctions, WindowCases) {
    const auto& f = fx();
    for (int psi = 1; psi <= 8; ++psi) EXPECT_EQ(f.tr.window(psi, 3000.0), f.tr.t_m(psi));
    EXPECT_EQ(f.tr.window(0, 4000.0), 2.0 / 4000.0);
    EXPECT_THROW((void)f.tr.window(0, 0.0), DomainError);
    EXPECT_EQ(f.tr.L1_tilde(0.5, 0.2, 3, 3000.0), f.tr.L1(0.5, 0.2, 3));
    EXPECT_EQ(f.tr.L2_tilde(0.5, 0.2, 3, 3000.0), f.tr.L2(0.5, 0.2, 3));
    EXPECT_NEAR(f.tr.L2_tilde(0.5, 0.2, 0, 3000.0), f.tr.h_ch_bound(2.0 / 3000.0, 0.5, 0.2, 0), 1e-15);
}

TEST(TriggerFunctions, L3Boundary) {
    const auto& f = fx();
    const double tl = 4.88, tb = 2.0, now = 4.5;
    const double eps = f.tr.epsilon_r(tb) * std::exp(-f.c.mu_bar * (tl - now));
    EXPECT_NEAR(f.tr.L3(now, eps, tl, tb, 0.0), 0.0, 1e-9);
    EXPECT_LT(f.tr.L3(now, eps, tl, tb, 10.0), 0.0);
    EXPECT_GT(f.tr.L3(now, 2 * eps, tl, tb, 0.0), 0.0);
    EXPECT_TRUE(std::isinf(f.tr.L3(now, eps, std::nullopt, tb, 0.0)));
}

TEST(TriggerFunctions, MinBits) {
    const auto& f = fx();
    const auto p = f.tr.min_bits(0.5, 0.5 * f.tr.rho(0.5), 20, [&](int q) { return q == 0 ? 0.0 : f.tr.t_m(q); });
    ASSERT_TRUE(p.has_value());
    EXPECT_LE(f.tr.h_ch_bound(*p == 0 ? 0.0 : f.tr.t_m(*p), 0.5, 0.5 * f.tr.rho(0.5), *p), 1.0);
    if (*p > 0) {
        const int q = *p - 1;
        EXPECT_GT(f.tr.h_ch_bound_or_inf(q == 0 ? 0.0 : f.tr.t_m(q), 0.5, 0.5 * f.tr.rho(0.5), q), 1.0);
    }
}

TEST(TriggerConfig, Validation) {
    TriggerConfig cfg{0.05, 0.06, 0.8};
    EXPECT_NO_THROW(cfg.validate());
    cfg.sigma = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {0.0, 0.06, 0.8};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {0.05, 0.06, 0.0};
    EXPECT_THROW(cfg.validate(), ConfigError);
}
