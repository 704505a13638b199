#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fockcm/generators.hpp"
#include "fockcm/random_field.hpp"

using namespace fockcm;

namespace {

const GridSpec g{1, 16, 0.5};
constexpr int kSamples = 10000;

void expect_within(const McResult& r, double expected, double k = 5.0) {
    EXPECT_LE(std::abs(r.mean - expected), k * r.stderr_ + 1e-12) << "mean " << r.mean << " expected " << expected << " se " << r.stderr_;
}

void expect_within(const McComplexResult& r, cplx expected) {
    expect_within(r.re, expected.real());
    expect_within(r.im, expected.imag());
}

// <g, h> in Fock space by direct sums, conjugate-linear in g
cplx fock_pair(const FockVector& a, const FockVector& b) {
    cplx s = std::conj(a.vacuum) * b.vacuum;
    for (int n = 1; n <= a.nmax; ++n) {
        cplx t{};
        for (std::size_t i = 0; i < a.sector(n).size(); ++i) t += std::conj(a.sector(n)[i]) * b.sector(n)[i];
        s += t * std::pow(g.delta, n);
    }
    return s;
}

}  // namespace

TEST(WhiteNoise, ReproducibleAndSplit) {
    auto a = sample_white_noise(42, g), b = sample_white_noise(42, g);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(sample_white_noise(split_seed(42, 0), g).values, sample_white_noise(split_seed(42, 1), g).values);
    EXPECT_NE(split_seed(42, 0), split_seed(43, 0));
    EXPECT_STREQ(kSplitRule, "split-v1");
}

TEST(WhiteNoise, CellMomentsWithinClt) {
    auto mean = mc_expect([](std::uint64_t s) { return sample_white_noise(s, g).values[3]; }, kSamples, 7);
    expect_within(mean, 0.0);
    auto var = mc_expect([](std::uint64_t s) { return std::pow(sample_white_noise(s, g).values[3], 2); }, kSamples, 8);
    expect_within(var, 1.0 / g.cell());
    auto cov = mc_expect(
        [](std::uint64_t s) {
            auto x = sample_white_noise(s, g);
            return x.values[3] * x.values[9];
        },
        kSamples, 9);
    expect_within(cov, 0.0);
}

TEST(Potential, SiftingAndCovariance) {
    auto noise = sample_white_noise(5, g);
    CVec bump(g.points(), cplx{});
    bump[0] = 1.0 / g.cell();
    auto pf = potential_field(bump, noise);
    for (std::size_t i = 0; i < g.points(); ++i) EXPECT_NEAR(pf.values[i], noise.values[i], 1e-12);

    Rng rng(3);
    CVec V = random_real_function(rng, g, 3);
    const std::size_t x = 2, xp = 6;
    double analytic = 0.0;
    for (std::size_t y = 0; y < g.points(); ++y) analytic += V[(y + 16 - x) % 16].real() * V[(y + 16 - xp) % 16].real();
    analytic *= g.cell();
    auto cov = mc_expect(
        [&](std::uint64_t s) {
            auto p = potential_field(V, sample_white_noise(s, g));
            return p.values[x] * p.values[xp];
        },
        kSamples, 11);
    expect_within(cov, analytic);
    auto mean = mc_expect([&](std::uint64_t s) { return potential_field(V, sample_white_noise(s, g)).values[x]; }, kSamples, 12);
    expect_within(mean, 0.0);
    CVec Vc = V;
    Vc[1] += cplx{0.0, 0.1};
    EXPECT_THROW(potential_field(Vc, noise), std::invalid_argument);
}

TEST(Chaos, VacuumAndSectorOneNorm) {
    FockVector u(g, 2);
    u.vacuum = {1.5, -0.5};
    auto noise = sample_white_noise(1, g);
    EXPECT_EQ(chaos_eval(u, noise, 4), u.vacuum);
    Rng rng(4);
    FockVector f(g, 1);
    f.sector(1) = random_function(rng, g, 4);
    auto r = mc_expect([&](std::uint64_t s) { return std::norm(chaos_eval(f, sample_white_noise(s, g), 5)); }, kSamples, 13);
    expect_within(r, std::pow(lp_norm(f.sector(1), g, 2.0), 2));
}

TEST(Chaos, IsometryOrderTwo) {
    Rng rng(6);
    FockVector u = random_fock(rng, g, 2, 3);
    const double packed_norm2 = std::pow(fock_norm(u), 2);  // sum_n n! |F_n|^2 with F_n = f_n / sqrt(n!)
    auto r = mc_expect([&](std::uint64_t s) { return std::norm(chaos_eval(u, sample_white_noise(s, g), 0)); }, kSamples, 14);
    expect_within(r, packed_norm2);
    FockVector big(g, 3);
    big.sector(3)[0] = 1.0;
    EXPECT_THROW(chaos_eval(big, sample_white_noise(1, g), 0), std::invalid_argument);
}

TEST(Chaos, ProductWithPotentialMatchesFieldOperator) {
    Rng rng(15);
    CVec V = random_real_function(rng, g, 3);
    FockVector f(g, 2);
    f.sector(1) = random_function(rng, g, 3);
    // E[V F] = vacuum component of (a(V) + a*(V)) f = <V, f_1>
    cplx expect{};
    for (std::size_t i = 0; i < g.points(); ++i) expect += std::conj(V[i]) * f.sector(1)[i];
    expect *= g.cell();
    auto r = mc_expect_complex(
        [&](std::uint64_t s) {
            auto noise = sample_white_noise(s, g);
            return potential_field(V, noise).values[0] * chaos_eval(f, noise, 0);
        },
        kSamples, 16);
    expect_within(r, expect);
    // Pairing against a random order <= 2 variable G: E[conj(G) V F] = <g, (a(V) + a*(V)) f>
    FockVector gv = random_fock(rng, g, 2, 3);
    FockVector af = axpy(1.0, annihilate(V, f), create(V, f));
    auto r2 = mc_expect_complex(
        [&](std::uint64_t s) {
            auto noise = sample_white_noise(s, g);
            return std::conj(chaos_eval(gv, noise, 0)) * potential_field(V, noise).values[0] * chaos_eval(f, noise, 0);
        },
        kSamples, 17);
    expect_within(r2, fock_pair(gv, af));
}

TEST(McExpect, ConstantGaussianAndReproducible) {
    auto c = mc_expect([](std::uint64_t) { return 2.5; }, 100, 1);
    EXPECT_DOUBLE_EQ(c.mean, 2.5);
    EXPECT_DOUBLE_EQ(c.stderr_, 0.0);
    auto gauss = [](std::uint64_t s) {
        std::mt19937_64 r(s);
        return std::normal_distribution<double>(0.0, 1.0)(r);
    };
    auto a = mc_expect(gauss, kSamples, 3);
    expect_within(a, 0.0);
    EXPECT_NEAR(a.stderr_, 1.0 / std::sqrt(double(kSamples)), 0.1 / std::sqrt(double(kSamples)));
    auto b = mc_expect(gauss, kSamples, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_THROW(mc_expect(gauss, 1, 3), std::invalid_argument);
}
