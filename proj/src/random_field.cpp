#include "fockcm/random_field.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fockcm {

std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index) {
    std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

WhiteNoiseSample sample_white_noise(std::uint64_t seed, const GridSpec& g) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0 / std::sqrt(g.cell()));
    WhiteNoiseSample s{g, RVec(g.points()), seed};
    for (auto& v : s.values) v = N(rng);
    return s;
}

PotentialField potential_field(const CVec& V, const WhiteNoiseSample& noise) {
    const GridSpec& g = noise.grid;
    if (V.size() != g.points()) throw std::invalid_argument("potential_field: V has wrong size");
    for (const auto& v : V)
        if (v.imag() != 0.0) throw std::invalid_argument("potential_field: V must be real");
    const std::vector<int> dims(static_cast<std::size_t>(g.d), g.M);
    CVec Vh = V, Xh(noise.values.begin(), noise.values.end());
    fft_nd(Vh, dims, -1);
    fft_nd(Xh, dims, -1);
    // correlation: hat c(k) = hat X(k) conj(hat V(k)) for real V
    for (std::size_t i = 0; i < Xh.size(); ++i) Xh[i] *= std::conj(Vh[i]);
    fft_nd(Xh, dims, +1);
    PotentialField out{g, RVec(g.points()), noise.seed};
    const double s = g.cell() / static_cast<double>(g.points());
    for (std::size_t i = 0; i < Xh.size(); ++i) out.values[i] = Xh[i].real() * s;
    return out;
}

namespace {

std::size_t offset(std::size_t y, std::size_t x, const GridSpec& g) {
    // flat index of y - x, componentwise modulo M
    std::size_t out = 0, stride = 1;
    for (int a = 0; a < g.d; ++a) {
        const std::size_t M = static_cast<std::size_t>(g.M);
        const std::size_t ya = y % M, xa = x % M;
        out += ((ya + M - xa) % M) * stride;
        stride *= M;
        y /= M;
        x /= M;
    }
    return out;
}

}  // namespace

cplx chaos_eval(const FockVector& u, const WhiteNoiseSample& noise, std::size_t x) {
    if (!(u.grid == noise.grid)) throw std::invalid_argument("chaos_eval: grid mismatch");
    for (int n = 3; n <= u.nmax; ++n)
        for (const auto& v : u.sector(n))
            if (v != cplx{}) throw std::invalid_argument("chaos_eval: Wick orders above 2 are not supported");
    const GridSpec& g = u.grid;
    const std::size_t P = g.points();
    if (x >= P) throw std::out_of_range("chaos_eval: x outside the grid");
    const double w = g.cell();
    const auto& X = noise.values;
    cplx F = u.vacuum;
    if (u.nmax >= 1) {
        const auto& f1 = u.sector(1);
        cplx s{};
        for (std::size_t y = 0; y < P; ++y) s += f1[offset(y, x, g)] * X[y];
        F += s * w;
    }
    if (u.nmax >= 2) {
        const auto& f2 = u.sector(2);
        const double inv = 1.0 / std::sqrt(2.0);
        std::vector<std::size_t> off(P);
        for (std::size_t y = 0; y < P; ++y) off[y] = offset(y, x, g);
        cplx s{};
        for (std::size_t a = 0; a < P; ++a) {
            cplx row{};
            const cplx* base = f2.data() + off[a] * P;
            for (std::size_t b = 0; b < P; ++b) row += base[off[b]] * X[b];
            s += row * X[a];
            s -= base[off[a]] / w;  // contraction of :X_a X_a:
        }
        F += s * w * w * inv;
    }
    return F;
}

McResult mc_expect(const std::function<double(std::uint64_t)>& estimator, int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_expect: need at least two samples");
    // Welford, fixed order
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double x = estimator(split_seed(seed, static_cast<std::uint64_t>(i)));
        const double delta = x - mean;
        mean += delta / (i + 1);
        m2 += delta * (x - mean);
    }
    const double var = m2 / (n_samples - 1);
    return {mean, std::sqrt(var / n_samples)};
}

McComplexResult mc_expect_complex(const std::function<cplx(std::uint64_t)>& estimator, int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_expect: need at least two samples");
    cplx mean{};
    double m2r = 0.0, m2i = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const cplx x = estimator(split_seed(seed, static_cast<std::uint64_t>(i)));
        const cplx delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2r += delta.real() * (x - mean).real();
        m2i += delta.imag() * (x - mean).imag();
    }
    const double n = n_samples;
    return {{mean.real(), std::sqrt(m2r / (n - 1) / n)}, {mean.imag(), std::sqrt(m2i / (n - 1) / n)}};
}

}  // namespace fockcm
