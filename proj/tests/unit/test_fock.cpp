#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fockcm/fock.hpp"
#include "fockcm/generators.hpp"

using namespace fockcm;

namespace {

GridSpec small_grid() { return {1, 8, 0.5}; }

CVec random_tensor(Rng& rng, std::size_t size) {
    std::normal_distribution<double> N(0.0, 1.0);
    CVec t(size);
    for (auto& v : t) v = {N(rng), N(rng)};
    return t;
}

// Dense S_3 average written out with explicit index arithmetic.
CVec brute_symmetrize3(const CVec& t, std::size_t P) {
    CVec out(t.size());
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (std::size_t a = 0; a < P; ++a)
        for (std::size_t b = 0; b < P; ++b)
            for (std::size_t c = 0; c < P; ++c) {
                const std::size_t x[3] = {a, b, c};
                cplx s{};
                for (const auto& p : perms) s += t[(x[p[0]] * P + x[p[1]]) * P + x[p[2]]];
                out[(a * P + b) * P + c] = s / 6.0;
            }
    return out;
}

double max_diff(const CVec& a, const CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_diff(const FockVector& a, const FockVector& b) {
    double m = std::abs(a.vacuum - b.vacuum);
    for (int n = 1; n <= a.nmax; ++n) m = std::max(m, max_diff(a.sector(n), b.sector(n)));
    return m;
}

// Keep sectors below nmax only, so a* loses nothing.
FockVector headroom(FockVector u) {
    std::fill(u.sectors.back().begin(), u.sectors.back().end(), cplx{});
    return u;
}

}  // namespace

TEST(Grid, Validation) {
    EXPECT_NO_THROW((GridSpec{1, 16, 0.1}.validate()));
    EXPECT_THROW((GridSpec{1, 12, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{1, 2, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{1, 16, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{0, 16, 1.0}.validate()), std::invalid_argument);
}

TEST(Grid, FftRoundTripAndDirectSum) {
    Rng rng(3);
    GridSpec g{2, 8, 1.0};
    CVec f = random_tensor(rng, g.points());
    CVec F = f;
    fft_nd(F, {8, 8}, -1);
    // direct DFT of one coefficient
    const int k1 = 3, k2 = 5;
    cplx s{};
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            s += f[static_cast<std::size_t>(a * 8 + b)] * std::polar(1.0, -2.0 * M_PI * (k1 * a + k2 * b) / 8.0);
    EXPECT_LT(std::abs(s - F[static_cast<std::size_t>(k1 * 8 + k2)]), 1e-10);
    fft_nd(F, {8, 8}, +1);
    for (auto& v : F) v /= 64.0;
    EXPECT_LT(max_diff(F, f), 1e-12);
}

TEST(Symmetrize, TwoParticleAverage) {
    GridSpec g = small_grid();
    Rng rng(1);
    CVec f = random_function(rng, g), h = random_function(rng, g);
    CVec t(64), expect(64);
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) {
            t[a * 8 + b] = f[a] * h[b];
            expect[a * 8 + b] = 0.5 * (f[a] * h[b] + h[a] * f[b]);
        }
    EXPECT_LT(max_diff(symmetrize(t, 2, 8), expect), 1e-14);
}

TEST(Symmetrize, MatchesBruteForceAndIsProjection) {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        CVec t = random_tensor(rng, 512);
        CVec s = symmetrize(t, 3, 8);
        EXPECT_LT(max_diff(s, brute_symmetrize3(t, 8)), 1e-12);
        EXPECT_LT(max_diff(symmetrize(s, 3, 8), s), 1e-12);
        // self-adjoint: <s(t), w> = <t, s(w)>
        CVec w = random_tensor(rng, 512);
        CVec sw = symmetrize(w, 3, 8);
        cplx l{}, r{};
        double nt = 0.0, ns = 0.0;
        for (std::size_t i = 0; i < 512; ++i) {
            l += std::conj(s[i]) * w[i];
            r += std::conj(t[i]) * sw[i];
            nt += std::norm(t[i]);
            ns += std::norm(s[i]);
        }
        EXPECT_LT(std::abs(l - r), 1e-10 * std::abs(l) + 1e-12);
        EXPECT_LE(ns, nt * (1.0 + 1e-14));
    }
}

TEST(FockNorm, VacuumAndProductState) {
    GridSpec g = small_grid();
    FockVector u(g, 2);
    u.vacuum = {3.0, 4.0};
    EXPECT_NEAR(fock_norm(u), 5.0, 1e-14);
    CVec phi(g.points(), cplx{2.0 / std::sqrt(g.L()), 0.0});  // L^2 norm 2
    EXPECT_NEAR(fock_norm(product_state(phi, 2, g, 2)), 4.0, 1e-12);
}

TEST(FockNorm, DenseSumOracle) {
    GridSpec g{1, 8, 0.3};
    Rng rng(5);
    FockVector u = random_fock(rng, g, 3);
    u = scaled(2.5, u);
    double s = std::norm(u.vacuum);
    const double w = g.delta;
    for (std::size_t a = 0; a < 8; ++a) s += std::norm(u.sector(1)[a]) * w;
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) s += std::norm(u.sector(2)[a * 8 + b]) * w * w;
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b)
            for (std::size_t c = 0; c < 8; ++c) s += std::norm(u.sector(3)[(a * 8 + b) * 8 + c]) * w * w * w;
    EXPECT_NEAR(fock_norm(u), std::sqrt(s), 1e-12 * std::sqrt(s));
}

TEST(Create, VacuumAndOneParticle) {
    GridSpec g = small_grid();
    Rng rng(7);
    CVec f = random_function(rng, g), h = random_function(rng, g);
    FockVector vac = product_state(f, 0, g, 2);
    FockVector c = create(f, vac);
    EXPECT_LT(max_diff(c.sector(1), f), 1e-15);
    FockVector one(g, 2);
    one.sector(1) = h;
    FockVector c2 = create(f, one);
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) {
            const cplx expect = std::sqrt(2.0) * 0.5 * (f[a] * h[b] + f[b] * h[a]);
            EXPECT_LT(std::abs(c2.sector(2)[a * 8 + b] - expect), 1e-14);
        }
}

TEST(CreateAnnihilate, AdjointAndCcr) {
    GridSpec g = small_grid();
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        FockVector u = headroom(random_fock(rng, g, 3));
        FockVector v = random_fock(rng, g, 3);
        CVec f = random_function(rng, g), h = random_function(rng, g);
        const cplx lhs = inner(create(f, u), v);
        const cplx rhs = inner(u, annihilate(f, v));
        EXPECT_LT(std::abs(lhs - rhs), 1e-10);
        // [a(h), a*(f)] u = <h, f> u
        FockVector ac = annihilate(h, create(f, u));
        FockVector ca = create(f, annihilate(h, u));
        cplx hf{};
        for (std::size_t i = 0; i < f.size(); ++i) hf += std::conj(h[i]) * f[i];
        hf *= g.cell();
        FockVector comm = axpy(-1.0, ca, ac);
        EXPECT_LT(max_diff(comm, scaled(hf, u)), 1e-10);
    }
}

TEST(Annihilate, VacuumAndProductStates) {
    GridSpec g = small_grid();
    Rng rng(13);
    CVec V = random_function(rng, g), phi = random_function(rng, g);
    FockVector vac = product_state(phi, 0, g, 3);
    EXPECT_EQ(fock_norm(annihilate(V, vac)), 0.0);
    cplx Vphi{};
    for (std::size_t i = 0; i < V.size(); ++i) Vphi += std::conj(V[i]) * phi[i];
    Vphi *= g.cell();
    for (int n = 1; n <= 3; ++n) {
        FockVector lhs = annihilate(V, product_state(phi, n, g, 3));
        FockVector rhs = scaled(std::sqrt(static_cast<double>(n)) * Vphi, product_state(phi, n - 1, g, 3));
        EXPECT_LT(max_diff(lhs, rhs), 1e-12);
    }
}

TEST(Create, DroppedMassMatchesExplicitOverflow) {
    GridSpec g = small_grid();
    Rng rng(17);
    FockVector u = random_fock(rng, g, 2);
    CVec f = random_function(rng, g);
    FockVector big(g, 3);
    big.vacuum = u.vacuum;
    big.sector(1) = u.sector(1);
    big.sector(2) = u.sector(2);
    const double explicit_mass = sector_norm2(create(f, big), 3);
    EXPECT_NEAR(create(f, u).dropped_mass, explicit_mass, 1e-12);
}

TEST(FieldOp, VacuumSymmetryAndCcr) {
    GridSpec g = small_grid();
    Rng rng(19);
    CVec V = random_real_function(rng, g);
    FockVector vac = product_state(V, 0, g, 3);
    FockVector one = field_op(V, vac);
    for (std::size_t i = 0; i < V.size(); ++i) EXPECT_LT(std::abs(one.sector(1)[i] - V[i] / std::sqrt(2.0)), 1e-15);
    FockVector two = field_op(V, one);
    EXPECT_NEAR(two.vacuum.real(), 0.5 * std::pow(lp_norm(V, g, 2.0), 2), 1e-12);
    for (int trial = 0; trial < 10; ++trial) {
        FockVector u = headroom(random_fock(rng, g, 3));
        FockVector w = headroom(random_fock(rng, g, 3));
        EXPECT_LT(std::abs(inner(u, field_op(V, w)) - inner(field_op(V, u), w)), 1e-10);
    }
    CVec Vc = V;
    Vc[0] += cplx{0.0, 1.0};
    EXPECT_THROW(field_op(Vc, vac), std::invalid_argument);
    EXPECT_NO_THROW(field_op(Vc, vac, true));
}

TEST(NumberWeight, ExponentsAndBounds) {
    GridSpec g = small_grid();
    Rng rng(23);
    FockVector u = random_fock(rng, g, 3);
    FockVector vac = product_state(u.sector(1), 0, g, 3);
    EXPECT_EQ(max_diff(number_weight(0.7, vac), vac), 0.0);
    FockVector w = number_weight(0.4, u);
    EXPECT_LT(max_diff(w.sector(2), [&] {
                  CVec s = u.sector(2);
                  for (auto& v : s) v *= std::exp(0.8);
                  return s;
              }()),
              1e-13);
    EXPECT_LT(max_diff(number_weight(0.3, number_weight(-0.5, u)), number_weight(-0.2, u)), 1e-14);
    for (double a : {0.2, 1.0, -0.6}) {
        const double r = fock_norm(number_weight(a, u)) / (std::exp(a * 3) * fock_norm(u));
        if (a >= 0)
            EXPECT_LE(r, 1.0 + 1e-14);
        else
            EXPECT_GE(r, 1.0 - 1e-14);
    }
    EXPECT_THROW(number_weight(300.0, u), std::overflow_error);
}

TEST(ChaosScale, RoundTripAndIsometry) {
    GridSpec g = small_grid();
    Rng rng(29);
    FockVector F = random_fock(rng, g, 3);
    FockVector back = chaos_scale(chaos_scale(F, ChaosDirection::pack), ChaosDirection::unpack);
    EXPECT_LT(max_diff(back, F), 1e-14);
    FockVector packed = chaos_scale(F, ChaosDirection::pack);
    EXPECT_LT(max_diff(packed.sector(2), [&] {
                  CVec s = F.sector(2);
                  for (auto& v : s) v *= std::sqrt(2.0);
                  return s;
              }()),
              1e-14);
    // sum_n n! |F_n|^2 by direct summation
    double chaos = std::norm(F.vacuum);
    double fact = 1.0;
    for (int n = 1; n <= 3; ++n) {
        fact *= n;
        double s = 0.0;
        for (const auto& v : F.sector(n)) s += std::norm(v);
        chaos += fact * s * std::pow(g.delta, n);
    }
    EXPECT_NEAR(std::pow(fock_norm(packed), 2), chaos, 1e-12 * chaos);
}

TEST(Dump, RoundTripInSinglePrecision) {
    GridSpec g = small_grid();
    Rng rng(31);
    FockVector u = random_fock(rng, g, 2);
    std::stringstream ss;
    write_dump(ss, u);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "FOCK");
    EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 8 + 4 + 8u * (1 + 8 + 64));
    FockVector r = read_dump(ss);
    EXPECT_EQ(r.grid, g);
    EXPECT_EQ(r.nmax, 2);
    EXPECT_LT(max_diff(r, u), 1e-6);
}
