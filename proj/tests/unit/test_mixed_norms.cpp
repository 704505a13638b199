#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fockcm/generators.hpp"
#include "fockcm/mixed_norms.hpp"

using namespace fockcm;

namespace {

constexpr double pi = std::numbers::pi;

RVec uniform_nodes(double tmax, int K) {
    RVec t(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) t[static_cast<std::size_t>(k)] = tmax * k / K;
    return t;
}

SectorProfile vacuum_profile(const RVec& t, const RVec& v) {
    SectorProfile s;
    s.times = t;
    for (double x : v) s.sq.push_back(RVec{x * x});
    return s;
}

// sin^2 bump on [lo, hi] (microscopic times) with unit L^2 mass: sin^4 integrates to 3/8 of the length.
double unit_bump(double t, double lo, double hi) {
    if (t <= lo || t >= hi) return 0.0;
    return std::pow(std::sin(pi * (t - lo) / (hi - lo)), 2) / std::sqrt(0.375 * (hi - lo));
}

}  // namespace

TEST(MixedNorms, ZeroTrajectoryGivesZero) {
    auto t = uniform_nodes(10.0, 64);
    TimeProfile f(t, RVec(t.size(), 0.0));
    for (int p : {1, 2})
        for (int i = 1; i <= 4; ++i) EXPECT_EQ(n_norm(f, p, i, 1.0, 0.1), 0.0);
    auto z = vacuum_profile(t, RVec(t.size(), 0.0));
    WeightParams w{0.1, 1.0, -1.0, 1.0, 1.0};
    EXPECT_EQ(weighted_M_total(z, z, z, w), 0.0);
}

TEST(MixedNorms, SingleDyadicBumpN23) {
    const double T = 2.0, h = 0.25;
    for (int n = 0; n <= 4; ++n) {
        Interval J = dyadic_interval(T, n);
        auto t = uniform_nodes(T / h, 4096);
        RVec v(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) v[k] = unit_bump(t[k], J.lo / h, J.hi / h);
        TimeProfile f(t, v);
        EXPECT_NEAR(n_norm(f, 2, 3, T, h), std::sqrt(T) * std::pow(2.0, -0.5 * n), 2e-3) << "n=" << n;
    }
}

TEST(MixedNorms, QuadratureIsExactOnLinearProfiles) {
    // g(t) = 1 + t on [0, 4]; integrals against closed forms
    RVec t = uniform_nodes(4.0, 8), v(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) v[k] = 1.0 + t[k];
    TimeProfile f(t, v);
    auto sq = [](double a, double b) { return (std::pow(1 + b, 3) - std::pow(1 + a, 3)) / 3.0; };
    EXPECT_NEAR(f.integral(0.3, 3.1, 2), sq(0.3, 3.1), 1e-12);
    EXPECT_NEAR(f.integral(0.3, 3.1, 1), (3.1 - 0.3) + (3.1 * 3.1 - 0.3 * 0.3) / 2, 1e-12);
    const double h = 0.5;
    auto w = [&](double a, double b) {
        return (2 * (std::sqrt(b) - std::sqrt(a)) + (2.0 / 3.0) * (std::pow(b, 1.5) - std::pow(a, 1.5))) / std::sqrt(h);
    };
    EXPECT_NEAR(f.integral(0.7, 3.3, 1, h), w(0.7, 3.3), 1e-12);
    // the singular weight starts at the first positive node
    EXPECT_NEAR(f.integral(0.0, 3.3, 1, h), w(0.5, 3.3), 1e-12);
}

TEST(MixedNorms, KappaBandsFromProofChain) {
    auto k2 = kappa_band(2), k1 = kappa_band(1);
    EXPECT_NEAR(k2.k1, std::sqrt(3.0) + std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(k2.k2, 1 + 2 * std::sqrt(2.0) + std::sqrt(2.0 / 3.0), 1e-14);
    double c1 = std::sqrt(2.0) / (std::sqrt(2.0) - 1.0);
    EXPECT_NEAR(k1.k1, c1 * std::sqrt(2.0) * 2 / std::sqrt(3.0), 1e-13);
    EXPECT_GT(k1.total(), k2.total());
}

TEST(MixedNorms, EquivalenceRatiosInsideBands) {
    Rng rng(20240611);
    const double T = 1.5, h = 0.2;
    for (int trial = 0; trial < 200; ++trial) {
        TimeProfile f = random_time_profile(rng, T, h, 512);
        for (int p : {1, 2}) {
            double kap = kappa_band(p).total();
            double n1 = n_norm(f, p, 1, T, h);
            ASSERT_GT(n1, 0.0);
            for (int i = 2; i <= 4; ++i) {
                double r = n_norm(f, p, i, T, h) / n1;
                EXPECT_LE(r, kap) << "trial " << trial << " p " << p << " i " << i;
                EXPECT_GE(r, 1.0 / kap) << "trial " << trial << " p " << p << " i " << i;
            }
        }
    }
}

TEST(MixedNorms, Homogeneity) {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const double T = 0.5 + 2.0 * trial / 20.0, h = 0.05 + 0.01 * trial;
        TimeProfile f = random_time_profile(rng, T, h, 256);
        RVec s = f.times(), v(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            v[k] = f.value(s[k]);
            s[k] *= h / T;  // phi~(s) = phi(T s / h)
        }
        TimeProfile g(s, v);
        for (int p : {1, 2})
            for (int i = 1; i <= 4; ++i) {
                double lhs = n_norm(f, p, i, T, h);
                double rhs = T / std::pow(h, 1.0 / p) * n_norm(g, p, i, 1.0, 1.0);
                EXPECT_NEAR(lhs / rhs, 1.0, 1e-10) << "p " << p << " i " << i;
            }
    }
}

TEST(MixedNorms, DyadicPartitionGeometry) {
    const double T = 3.0;
    auto P = dyadic_partition(T, DyadicMode::around_T, 12);
    EXPECT_DOUBLE_EQ(P.intervals[0].lo, 0.0);
    EXPECT_DOUBLE_EQ(P.intervals[0].hi, T / 2);
    for (std::size_t j = 0; j < P.intervals.size(); ++j) {
        EXPECT_NEAR(P.intervals[j].length(), T * std::ldexp(1.0, -static_cast<int>(j) - 1), 1e-15);
        if (j > 0) EXPECT_DOUBLE_EQ(P.intervals[j].lo, P.intervals[j - 1].hi);
    }
    EXPECT_LE(T - P.covered(), std::ldexp(T, -12));

    auto Q = dyadic_partition(T, DyadicMode::around_0_and_T, 12);
    bool found = false;
    for (std::size_t j = 0; j < Q.intervals.size(); ++j) {
        const auto& J = Q.intervals[j];
        if (J.n == 0) {
            EXPECT_DOUBLE_EQ(J.lo, T / 4);
            EXPECT_DOUBLE_EQ(J.hi, T / 2);
            found = true;
        }
        if (J.n < 0) {
            EXPECT_DOUBLE_EQ(J.lo, std::ldexp(T / 4, J.n));
            EXPECT_DOUBLE_EQ(J.hi, std::ldexp(T / 2, J.n));
        }
        if (j > 0) EXPECT_DOUBLE_EQ(J.lo, Q.intervals[j - 1].hi);
    }
    EXPECT_TRUE(found);
    EXPECT_LE(T - Q.covered(), std::ldexp(T, -12) + std::ldexp(T / 4, -12) + 1e-15);
}

TEST(MixedNorms, AlphaPrimeSchedule) {
    EXPECT_DOUBLE_EQ(alpha_prime_schedule(0.0, 1.0, 1), 0.125);
    WeightParams w{0.1, 2.0, -1.0, 1.0, 1.0};
    WeightParams unit{0.1, 1.0, -1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(unit.T_alpha(0.125), 0.875);
    const double alpha = -0.3;
    for (int n = 2; n <= 6; ++n) {
        double ap = alpha_prime_schedule(alpha, w.alpha1, n);
        EXPECT_NEAR(w.T_alpha(ap) - (1.0 - std::ldexp(1.0, -n - 2)) * w.T_alpha(alpha), 0.0, 1e-14);
        // J^n_{T_alpha} = [T_alpha - 4 d_n, T_alpha - 2 d_n) = [T_{alpha'_n} - 3 d_n, T_{alpha'_n} - d_n)
        double dn = w.T_alpha(alpha) / std::ldexp(1.0, n + 2);
        Interval J = dyadic_interval(w.T_alpha(alpha), n);
        EXPECT_NEAR(J.lo, w.T_alpha(ap) - 3 * dn, 1e-14);
        EXPECT_NEAR(J.hi, w.T_alpha(ap) - dn, 1e-14);
    }
    double a0 = alpha_prime_schedule(alpha, w.alpha1, 0);
    EXPECT_NEAR(0.875 * w.T_alpha(a0), 0.75 * w.T_alpha(alpha), 1e-14);
    EXPECT_THROW(alpha_prime_schedule(1.0, 1.0, 1), std::invalid_argument);
}

TEST(WeightedM, VacuumOracleForMinf) {
    WeightParams w{0.1, 0.8, -0.5, 1.0, 1.0};
    const double c = 1.7;
    const double Tmax = w.T_alpha(w.alpha0) / w.h;
    for (int K : {200, 400, 800}) {
        auto t = uniform_nodes(Tmax, K);
        RVec v(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) v[k] = std::sqrt(w.h * t[k]) * c;
        auto u = vacuum_profile(t, v);
        double M = weighted_M(u, u, u, w, MWhich::inf);
        double exact = c * std::sqrt(w.gamma * (w.alpha1 - w.alpha0));
        // supremum approached as t -> 0+, first node sits at h t_1 = T / K
        EXPECT_LE(M, exact * (1 + 1e-14));
        EXPECT_NEAR(M, exact, exact * 1.0 / K);
    }
}

TEST(WeightedM, M2MatchesDirectSweep) {
    WeightParams w{0.2, 1.0, 0.0, 1.0, 0.7};
    const double Tmax = w.T_alpha(w.alpha0) / w.h;
    const int K = 2000;
    auto t = uniform_nodes(Tmax, K);
    Interval J = dyadic_interval(w.T_alpha(w.alpha0), 1);
    RVec v(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) v[k] = unit_bump(t[k], J.lo / w.h, J.hi / w.h);
    auto u = vacuum_profile(t, v);
    auto z = vacuum_profile(t, RVec(t.size(), 0.0));
    SupGrid grid;
    double M2 = weighted_M(z, u, z, w, MWhich::two, grid);

    // direct sweep: analytic mass of the bump up to tau, dense tau, same alpha set
    auto mass = [&](double tau) {
        double a = J.lo / w.h, b = J.hi / w.h, x = std::clamp(tau / w.h, a, b);
        double th = pi * (x - a) / (b - a);
        double s4 = 3 * th / 8 - std::sin(2 * th) / 4 + std::sin(4 * th) / 32;  // integral of sin^4
        return s4 * (b - a) / pi / (0.375 * (b - a));
    };
    double best = 0.0;
    for (int k = 0; k < grid.alpha_samples; ++k) {
        double Ta = w.T_alpha(w.alpha0 + k * (w.alpha1 - w.alpha0) / grid.alpha_samples);
        for (int j = 0; j < 200000; ++j) {
            double tau = Ta * j / 200000.0;
            best = std::max(best, std::sqrt(Ta - tau) * std::sqrt(mass(tau)));
        }
    }
    best /= w.M_alpha01() * w.C_V * std::sqrt(w.gamma);
    EXPECT_NEAR(M2, best, 1e-3 * best);
}

TEST(WeightedM, HomogeneousAndMonotone) {
    Rng rng(5);
    WeightParams w{0.1, 1.0, -1.0, 0.5, 1.0};
    const double Tmax = w.T_alpha(w.alpha0) / w.h;
    auto t = uniform_nodes(Tmax, 100);
    auto mk = [&](double scale) {
        SectorProfile s;
        s.times = t;
        Rng r2(9);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (std::size_t k = 0; k < t.size(); ++k) s.sq.push_back(RVec{scale * scale * U(r2), scale * scale * U(r2), scale * scale * U(r2)});
        return s;
    };
    auto a = mk(1.0), b = mk(2.5);
    for (MWhich m : {MWhich::inf, MWhich::two, MWhich::one})
        EXPECT_NEAR(weighted_M(b, b, b, w, m), 2.5 * weighted_M(a, a, a, w, m), 1e-12 * weighted_M(b, b, b, w, m));
    // raising one sector norm cannot lower any functional
    auto c = a;
    for (auto& s : c.sq) s[1] *= 1.5;
    for (MWhich m : {MWhich::inf, MWhich::two, MWhich::one}) EXPECT_GE(weighted_M(c, c, c, w, m), weighted_M(a, a, a, w, m));
}

TEST(WeightedM, EmptyWindowThrows) {
    WeightParams w{0.1, 1.0, -1.0, 1.0, 1.0};
    RVec t{0.0, 1e3};
    auto u = vacuum_profile(t, RVec{1.0, 1.0});
    EXPECT_THROW(weighted_M(u, u, u, w, MWhich::inf), std::invalid_argument);
    WeightParams bad{0.1, 1.0, 1.0, 1.0, 1.0};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
