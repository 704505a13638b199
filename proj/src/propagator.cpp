#include "fockcm/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fockcm {

namespace {

// e^{-it|xi - k|^2} / P for every y_G Fourier slot.
CVec free_multiplier(const GridSpec& g, double t, const RVec& xi) {
    const std::size_t P = g.points();
    const RVec k = wavenumbers(g);
    CVec m(P);
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    for (std::size_t p = 0; p < P; ++p) {
        unflatten(p, g, idx.data());
        double e = 0.0;
        for (int a = 0; a < g.d; ++a) {
            const double x = (xi.empty() ? 0.0 : xi[static_cast<std::size_t>(a)]) - k[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
            e += x * x;
        }
        m[p] = std::polar(1.0 / static_cast<double>(P), -t * e);
    }
    return m;
}

std::vector<int> grid_dims(const GridSpec& g) { return std::vector<int>(static_cast<std::size_t>(g.d), g.M); }

}  // namespace

CVec evolve_free(const CVec& psi, const GridSpec& g, double t, const RVec& xi) {
    if (psi.size() != g.points()) throw std::invalid_argument("evolve_free: wrong size");
    if (t == 0.0) return psi;
    CVec f = psi;
    fft_nd(f, grid_dims(g), -1);
    const CVec m = free_multiplier(g, t, xi);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= m[i];
    fft_nd(f, grid_dims(g), +1);
    return f;
}

CMFockVector evolve_free_fock(const CMFockVector& v, double t) {
    if (t == 0.0) return v;
    CMFockVector out = v;
    const std::size_t P = v.grid.points();
    const auto gd = grid_dims(v.grid);
    for (auto& s : out.slots) {
        double xi2 = 0.0;
        for (double x : s.xi) xi2 += x * x;
        s.vacuum *= std::polar(1.0, -t * xi2);
        const CVec m = free_multiplier(v.grid, t, s.xi);
        for (int n = 1; n <= v.nmax; ++n) {
            auto& box = s.sectors[static_cast<std::size_t>(n - 1)];
            const std::size_t R = v.rel_points(n);
            fft_leading(box, gd, R, -1);
            for (std::size_t gi = 0; gi < P; ++gi) {
                const cplx mg = m[gi];
                cplx* row = box.data() + gi * R;
                for (std::size_t rho = 0; rho < R; ++rho) row[rho] *= mg;
            }
            fft_leading(box, gd, R, +1);
        }
    }
    return out;
}

double band_kmax(const CVec& g, const GridSpec& grid, double tail) {
    CVec F = g;
    fft_nd(F, grid_dims(grid), -1);
    // energy by shell index max_a |k_a|
    RVec shell(static_cast<std::size_t>(grid.M / 2 + 1), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(grid.d));
    double total = 0.0;
    for (std::size_t p = 0; p < F.size(); ++p) {
        unflatten(p, grid, idx.data());
        int m = 0;
        for (int a = 0; a < grid.d; ++a) m = std::max(m, std::abs(signed_freq(idx[static_cast<std::size_t>(a)], grid.M)));
        const double e = std::norm(F[p]);
        shell[static_cast<std::size_t>(m)] += e;
        total += e;
    }
    double outside = total;
    for (std::size_t m = 0; m < shell.size(); ++m) {
        outside -= shell[m];
        if (outside <= tail * total) return 2.0 * std::numbers::pi * static_cast<double>(std::max<std::size_t>(m, 1)) / grid.L();
    }
    return std::numbers::pi / grid.delta;
}

double wrap_time(const CVec& g, const GridSpec& grid, double tail) { return grid.L() / (4.0 * 2.0 * band_kmax(g, grid, tail)); }

double dispersive_ratio(const CVec& g, const GridSpec& grid, double t, double tail) {
    if (t == 0.0) throw std::domain_error("dispersive_ratio: t must be nonzero");
    const double tw = wrap_time(g, grid, tail);
    if (std::abs(t) > tw) throw std::domain_error("dispersive_ratio: t outside the no-wrap window");
    const double l1 = lp_norm(g, grid, 1.0);
    const double linf = lp_norm(evolve_free(g, grid, t), grid, 0.0);
    return linf * std::pow(4.0 * std::numbers::pi * std::abs(t), grid.d / 2.0) / l1;
}

double decay_slope(const CVec& g, const GridSpec& grid, const RVec& times) {
    if (times.size() < 2) throw std::invalid_argument("decay_slope: need at least two times");
    RVec x, y;
    for (double t : times) {
        x.push_back(t);
        y.push_back(lp_norm(evolve_free(g, grid, t), grid, 0.0));
    }
    return loglog_slope(x, y);
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const std::int64_t gcd = std::gcd(n < 0 ? -n : n, d);
    num = gcd ? n / gcd : 0;
    den = gcd ? d / gcd : 1;
}

Rational operator+(const Rational& a, const Rational& b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Rational operator-(const Rational& a, const Rational& b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
Rational operator*(const Rational& a, const Rational& b) { return {a.num * b.num, a.den * b.den}; }
Rational operator/(const Rational& a, const Rational& b) { return {a.num * b.den, a.den * b.num}; }

StrichartzExponents strichartz_exponents(int d) {
    if (d < 1) throw std::invalid_argument("strichartz_exponents: d must be >= 1");
    StrichartzExponents e;
    e.d = d;
    e.sigma = Rational(d, 2);
    const Rational one(1);
    const Rational two_sigma = Rational(2) * e.sigma;
    e.inv_r_prime = (e.sigma + one) / two_sigma;
    e.endpoint_available = d > 2;
    e.inv_r = d >= 2 ? (e.sigma - one) / two_sigma : Rational(0);
    return e;
}

bool admissible_check(const Rational& inv_q, const Rational& inv_r, const Rational& sigma) {
    return inv_q + sigma * inv_r == sigma * Rational(1, 2);
}

double strichartz_quotient(const CVec& g, const GridSpec& grid, double r, double T, int nt) {
    if (nt < 1 || !(T > 0.0)) throw std::invalid_argument("strichartz_quotient: bad time grid");
    CVec F = g;
    const auto gd = grid_dims(grid);
    fft_nd(F, gd, -1);
    const double dt = T / nt;
    double acc = 0.0;
    for (int m = 0; m <= nt; ++m) {
        CVec f = F;
        const CVec mult = free_multiplier(grid, m * dt, {});
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= mult[i];
        fft_nd(f, gd, +1);
        const double w = (m == 0 || m == nt) ? 0.5 : 1.0;
        acc += w * std::pow(lp_norm(f, grid, r), 2);
    }
    return std::sqrt(acc * dt) / lp_norm(g, grid, 2.0);
}

}  // namespace fockcm
