#include <gtest/gtest.h>

#include <cmath>

#include "fockcm/duhamel.hpp"
#include "fockcm/generators.hpp"
#include "fockcm/propagator.hpp"

using namespace fockcm;

namespace {

const GridSpec small{1, 16, 1.0};

CMFockVector sample_state(unsigned long long seed, int nmax = 2) {
    Rng rng(seed);
    return random_cm(rng, small, nmax, safe_band(small, nmax));
}

CVec sample_potential(unsigned long long seed, double scale = 1.0) {
    Rng rng(seed);
    CVec V = random_real_function(rng, small, 4);
    for (auto& x : V) x *= scale;
    return V;
}

SolverConfig small_config() {
    SolverConfig cfg;
    cfg.h = 0.1;
    cfg.gamma = 0.05;
    cfg.dt = 0.05;
    cfg.min_steps = 32;
    cfg.tol = 1e-11;
    return cfg;
}

double seq_dist(const StateSeq& a, const StateSeq& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, cm_norm(cm_axpy(-1.0, a[k], b[k])));
    return m;
}

SystemTrajectory random_triple(const SolverConfig& cfg, unsigned long long seed) {
    SystemTrajectory x;
    x.times = cfg.times();
    CMFockVector a = sample_state(seed), b = sample_state(seed + 1), c = sample_state(seed + 2);
    for (double t : x.times) {
        x.inf.push_back(evolve_free_fock(a, t));
        x.two.push_back(cm_scaled(std::cos(t), evolve_free_fock(b, t)));
        x.one.push_back(cm_scaled(t, evolve_free_fock(c, 0.5 * t)));
    }
    return x;
}

}  // namespace

TEST(Duhamel, ChiValues) {
    EXPECT_EQ(chi_value(ChiKind::hard, 0.0, 50), 1.0);
    EXPECT_EQ(chi_value(ChiKind::exponential, 0.0, 50), 1.0);
    EXPECT_EQ(chi_value(ChiKind::hard, 0.5, 2), 1.0);
    EXPECT_EQ(chi_value(ChiKind::hard, 0.5, 3), 0.0);
    EXPECT_NEAR(chi_value(ChiKind::exponential, 0.1, 3), std::exp(-0.3), 1e-15);
}

TEST(Duhamel, StepCountAndValidation) {
    SolverConfig cfg = small_config();
    EXPECT_GE(cfg.steps(), cfg.min_steps);
    EXPECT_NEAR(cfg.times().back(), cfg.window(), 1e-12);
    EXPECT_NO_THROW(cfg.validate(small));
    SolverConfig coarse = cfg;
    coarse.min_steps = 1;
    coarse.dt = 0.5;
    EXPECT_THROW(coarse.validate(small), std::invalid_argument);
    SolverConfig bad = cfg;
    bad.alpha0 = 2.0;
    EXPECT_THROW(bad.validate(small), std::invalid_argument);
}

TEST(Duhamel, IntegralExactOnFreeOrbits) {
    // phi(s) = U(s) w gives int_0^t U(t - s) U(s) w ds = t U(t) w, which the trapezoid rule integrates exactly
    CMFockVector w = sample_state(3);
    const double dt = 0.07;
    RVec t;
    for (int k = 0; k <= 20; ++k) t.push_back(dt * k);
    StateSeq phi = free_trajectory(w, t);
    StateSeq I = duhamel_integral(phi, dt);
    for (std::size_t k = 0; k < t.size(); ++k)
        EXPECT_LT(cm_norm(cm_axpy(-t[k], evolve_free_fock(w, t[k]), I[k])), 1e-12);
}

TEST(Duhamel, IntegralSecondOrderOnPhases) {
    // phi(s) = e^{i lambda s} U(s) w gives U(t) w (e^{i lambda t} - 1) / (i lambda)
    CMFockVector w = sample_state(4);
    const double lambda = 3.0, T = 2.0;
    auto err = [&](int K) {
        const double dt = T / K;
        StateSeq phi;
        for (int k = 0; k <= K; ++k) phi.push_back(cm_scaled(std::exp(cplx(0, lambda * dt * k)), evolve_free_fock(w, dt * k)));
        CMFockVector exact = cm_scaled((std::exp(cplx(0, lambda * T)) - 1.0) / cplx(0, lambda), evolve_free_fock(w, T));
        return cm_norm(cm_axpy(-1.0, exact, duhamel_integral(phi, dt).back()));
    };
    const double e1 = err(40), e2 = err(80);
    EXPECT_LT(e1, 1e-2);
    EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(Duhamel, ZeroPotentialIsFree) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(5);
    auto V = PotentialPair::same(CVec(small.points(), 0.0));
    auto [fi, f2] = rhs_build(u0, V, cfg);
    for (std::size_t k = 0; k < fi.size(); ++k) {
        EXPECT_EQ(cm_norm(fi[k]), 0.0);
        EXPECT_EQ(cm_norm(f2[k]), 0.0);
    }
    auto res = picard_solve(u0, V, cfg);
    EXPECT_TRUE(res.diag.converged);
    EXPECT_EQ(res.diag.iterations, 1);
    auto ref = reference_integrate(u0, V, cfg);
    EXPECT_LT(seq_dist(ref.states, free_trajectory(u0, ref.times)), 1e-12);
}

TEST(Duhamel, RhsConvergesAtSecondOrder) {
    CMFockVector u0 = sample_state(6);
    auto V = PotentialPair::same(sample_potential(7));
    SolverConfig cfg = small_config();
    auto at_end = [&](int steps) {
        SolverConfig c = cfg;
        c.min_steps = steps;
        auto [fi, f2] = rhs_build(u0, V, c);
        return std::pair{fi.back(), f2.back()};
    };
    auto [a, a2] = at_end(32);
    auto [b, b2] = at_end(64);
    auto [c, c2] = at_end(512);
    const double ea = cm_norm(cm_axpy(-1.0, c, a)), eb = cm_norm(cm_axpy(-1.0, c, b));
    EXPECT_GT(ea / eb, 3.5);
    EXPECT_LT(ea / eb, 4.5);
    EXPECT_LT(cm_norm(cm_axpy(-1.0, c2, b2)), 4.0 * eb * (1.0 + cm_norm(b2)));
}

TEST(Duhamel, ApplyLIsLinear) {
    SolverConfig cfg = small_config();
    auto V = PotentialPair::same(sample_potential(8));
    SystemTrajectory x = random_triple(cfg, 10), y = random_triple(cfg, 20);
    const cplx a{0.3, -1.1}, b{2.0, 0.5};
    SystemTrajectory z;
    z.times = x.times;
    for (std::size_t k = 0; k < x.times.size(); ++k) {
        z.inf.push_back(cm_axpy(a, x.inf[k], cm_scaled(b, y.inf[k])));
        z.two.push_back(cm_axpy(a, x.two[k], cm_scaled(b, y.two[k])));
        z.one.push_back(cm_axpy(a, x.one[k], cm_scaled(b, y.one[k])));
    }
    auto Lx = apply_L(x, V, cfg), Ly = apply_L(y, V, cfg), Lz = apply_L(z, V, cfg);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < x.times.size(); ++k) {
        err = std::max(err, cm_norm(cm_axpy(-1.0, cm_axpy(a, Lx.inf[k], cm_scaled(b, Ly.inf[k])), Lz.inf[k])));
        err = std::max(err, cm_norm(cm_axpy(-1.0, cm_axpy(a, Lx.two[k], cm_scaled(b, Ly.two[k])), Lz.two[k])));
        err = std::max(err, cm_norm(cm_axpy(-1.0, cm_axpy(a, Lx.one[k], cm_scaled(b, Ly.one[k])), Lz.one[k])));
        scale = std::max(scale, cm_norm(Lz.inf[k]));
    }
    EXPECT_LT(err, 1e-12 * (1.0 + scale));

    SystemTrajectory zero = x;
    for (std::size_t k = 0; k < x.times.size(); ++k) {
        zero.inf[k] = cm_zero_like(x.inf[k]);
        zero.two[k] = cm_zero_like(x.two[k]);
        zero.one[k] = cm_zero_like(x.one[k]);
    }
    EXPECT_EQ(system_M(apply_L(zero, V, cfg), cfg), 0.0);
}

TEST(Duhamel, ReferenceConservesNormAndIsSecondOrder) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(11);
    auto V = PotentialPair::same(sample_potential(12, 2.0));
    auto r1 = reference_integrate(u0, V, cfg, 1);
    auto r2 = reference_integrate(u0, V, cfg, 2);
    auto r8 = reference_integrate(u0, V, cfg, 8);
    for (const auto& s : r8.states) EXPECT_NEAR(cm_norm(s), cm_norm(u0), 1e-10);
    const double e1 = cm_norm(cm_axpy(-1.0, r8.states.back(), r1.states.back()));
    const double e2 = cm_norm(cm_axpy(-1.0, r8.states.back(), r2.states.back()));
    EXPECT_GT(e1 / e2, 3.0);
    EXPECT_LT(e1 / e2, 5.0);
}

TEST(Duhamel, PicardMatchesSplitStepOracle) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(13);
    auto V = PotentialPair::same(sample_potential(14));
    auto res = picard_solve(u0, V, cfg);
    ASSERT_TRUE(res.diag.converged);
    EXPECT_LT(res.diag.contraction, 0.9);
    auto uG = reconstruct(res.sol.inf, u0, res.sol.times);
    auto ref = reference_integrate(u0, V, cfg, 4);
    EXPECT_LT(seq_dist(uG, ref.states), 1e-4);

    // sqrt(h) a_G u_G = u_1 + sqrt(h) u_2 holds on the solution, and fails once u_1 is perturbed
    RVec id = identity_split_check(res.sol, uG, V, cfg);
    for (double r : id) EXPECT_LT(r, 1e-12);
    SystemTrajectory broken = res.sol;
    broken.one.back() = cm_axpy(1e-3, sample_state(99), broken.one.back());
    EXPECT_GT(identity_split_check(broken, uG, V, cfg).back(), 1e-4);
}

TEST(Duhamel, OversizedWindowIsRejected) {
    SolverConfig cfg = small_config();
    cfg.gamma = 2.0;
    cfg.h = 0.5;
    CMFockVector u0 = sample_state(15);
    auto V = PotentialPair::same(sample_potential(16, 20.0));
    EXPECT_GE(contraction_ratio(u0, V, cfg), 0.9);
    EXPECT_THROW(picard_solve(u0, V, cfg), ContractionError);
}

TEST(Duhamel, HardCutoffAboveNmaxIsExact) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(17);
    CVec V = sample_potential(18);
    cfg.chi = ChiKind::hard;
    cfg.eps = 1.0 / (cfg.nmax + 0.5);
    for (double g : truncation_gap(u0, V, cfg)) EXPECT_LT(g, 1e-14);
    cfg.eps = 1.0 / (cfg.nmax - 0.5);
    RVec gap = truncation_gap(u0, V, cfg);
    EXPECT_GT(gap.back(), 1e-6);
    SolverConfig off = cfg;
    off.eps = 0.0;
    EXPECT_THROW(truncated_dynamics(u0, V, off), std::invalid_argument);
}

TEST(Duhamel, ExponentialTruncationGapIsLinear) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(19);
    CVec V = sample_potential(20, 2.0);
    auto sup_gap = [&](double eps) {
        SolverConfig c = cfg;
        c.eps = eps;
        RVec g = truncation_gap(u0, V, c);
        return *std::max_element(g.begin(), g.end());
    };
    const double a = sup_gap(0.02), b = sup_gap(0.01);
    EXPECT_GT(b, 0.0);
    EXPECT_NEAR(a / b, 2.0, 0.1);
}

TEST(Duhamel, PotentialPerturbation) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(21);
    CVec V = sample_potential(22);
    auto ref = PotentialPair::same(V);
    auto same = perturb_potential(u0, ref, ref, cfg);
    EXPECT_EQ(same.sup, 0.0);
    EXPECT_EQ(same.dV, 0.0);

    Rng rng(23);
    CVec dV = random_function(rng, small, 4);  // complex
    auto shifted = [&](double s) {
        PotentialPair p = ref;
        for (std::size_t i = 0; i < V.size(); ++i) p.V1[i] += s * dV[i];
        return p;
    };
    auto big = perturb_potential(u0, ref, shifted(0.02), cfg);
    auto half = perturb_potential(u0, ref, shifted(0.01), cfg);
    EXPECT_GT(half.sup, 0.0);
    EXPECT_NEAR(big.dV / half.dV, 2.0, 1e-12);
    EXPECT_NEAR(big.sup / half.sup, 2.0, 0.2);
}

TEST(Duhamel, ExpansionTrivialCases) {
    SolverConfig cfg = small_config();
    CMFockVector u0 = sample_state(24);
    auto V = PotentialPair::same(sample_potential(25));
    auto r = expansion_check(u0, V, cfg, {0.0, 0.02}, 32, 6);
    for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(r.remainders[static_cast<std::size_t>(k)][0], 0.0);
        EXPECT_GT(r.remainders[static_cast<std::size_t>(k)][1], 0.0);
    }
    // remainders decrease with the order
    EXPECT_GT(r.remainders[0][1], r.remainders[1][1]);
    EXPECT_GT(r.remainders[1][1], r.remainders[2][1]);

    auto zero = PotentialPair::same(CVec(small.points(), 0.0));
    auto z = expansion_check(u0, zero, cfg, {0.01, 0.02}, 32, 6);
    for (const auto& row : z.remainders)
        for (double x : row) EXPECT_EQ(x, 0.0);

    EXPECT_THROW(expansion_check(u0, V, cfg, {10.0}, 32, 6), std::invalid_argument);
    EXPECT_THROW(expansion_check(u0, V, cfg, {-0.01}, 32, 6), std::invalid_argument);
}

TEST(Duhamel, PotentialBound) {
    CVec V(small.points(), cplx(2.0, 0.0));
    // r' = 1 in d = 1: 1 + 2 L
    EXPECT_NEAR(potential_bound(V, small), 1.0 + 2.0 * small.L(), 1e-12);
}
