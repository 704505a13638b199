#include "fockcm/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fockcm {

namespace {

bool within(std::size_t flat, int nparticles, const GridSpec& g, int band) {
    if (band < 0) return true;
    for (int a = 0; a < g.d * nparticles; ++a) {
        const int k = signed_freq(static_cast<long long>(flat % static_cast<std::size_t>(g.M)), g.M);
        if (std::abs(k) > band) return false;
        flat /= static_cast<std::size_t>(g.M);
    }
    return true;
}

CVec random_sector(Rng& rng, const GridSpec& g, int n, int band) {
    std::normal_distribution<double> N01(0.0, 1.0);
    CVec F(ipow(g.points(), n), cplx{});
    for (std::size_t i = 0; i < F.size(); ++i)
        if (within(i, n, g, band)) F[i] = {N01(rng), N01(rng)};
    fft_nd(F, std::vector<int>(static_cast<std::size_t>(g.d * n), g.M), +1);
    return F;
}

void normalize(CVec& f, double w) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    s = std::sqrt(s * w);
    if (s > 0.0)
        for (auto& v : f) v /= s;
}

}  // namespace

CVec random_function(Rng& rng, const GridSpec& g, int band) {
    CVec f = random_sector(rng, g, 1, band);
    normalize(f, g.cell());
    return f;
}

CVec random_real_function(Rng& rng, const GridSpec& g, int band) {
    CVec f = random_sector(rng, g, 1, band);
    for (auto& v : f) v = v.real();
    normalize(f, g.cell());
    return f;
}

CVec periodized_gaussian(const GridSpec& g, const RVec& center, double sigma, const RVec& k0) {
    CVec f(g.points());
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    const double L = g.L();
    for (std::size_t p = 0; p < f.size(); ++p) {
        unflatten(p, g, idx.data());
        double prod = 1.0;
        double phase = 0.0;
        for (int a = 0; a < g.d; ++a) {
            const double y = coord(g, idx[static_cast<std::size_t>(a)]);
            const double c = center.empty() ? 0.0 : center[static_cast<std::size_t>(a)];
            double s = 0.0;
            for (int m = -3; m <= 3; ++m) {
                const double z = y - c + m * L;
                s += std::exp(-z * z / (2.0 * sigma * sigma));
            }
            prod *= s;
            if (!k0.empty()) phase += k0[static_cast<std::size_t>(a)] * y;
        }
        f[p] = prod * std::polar(1.0, phase);
    }
    return f;
}

FockVector random_fock(Rng& rng, const GridSpec& g, int nmax, int band) {
    std::normal_distribution<double> N01(0.0, 1.0);
    FockVector u(g, nmax);
    u.vacuum = {N01(rng), N01(rng)};
    for (int n = 1; n <= nmax; ++n) {
        CVec s = symmetrize(random_sector(rng, g, n, band), n, g.points());
        normalize(s, u.weight(n));
        const double a = std::abs(N01(rng)) + 0.1;
        for (auto& v : s) v *= a;
        u.sector(n) = std::move(s);
    }
    const double nrm = fock_norm(u);
    return scaled(1.0 / nrm, u);
}

CMFockVector random_cm(Rng& rng, const GridSpec& g, int nmax, int band, int nslots, double xi_max,
                       const std::vector<int>& refine) {
    std::uniform_real_distribution<double> U(-xi_max, xi_max);
    std::vector<FockVector> us;
    std::vector<RVec> xis;
    RVec weights;
    for (int s = 0; s < nslots; ++s) {
        us.push_back(random_fock(rng, g, nmax, band));
        RVec xi(static_cast<std::size_t>(g.d));
        for (auto& x : xi) x = xi_max > 0.0 ? U(rng) : 0.0;
        xis.push_back(xi);
        weights.push_back(1.0 / nslots);
    }
    return to_cm_slots(us, xis, weights, refine);
}

int safe_band(const GridSpec& g, int n) {
    if (n < 1) throw std::invalid_argument("safe_band: n must be >= 1");
    return (g.M / 2 - 1) / n;
}

TimeProfile random_time_profile(Rng& rng, double T, double h, int K) {
    if (K < 8) throw std::invalid_argument("random_time_profile: K must be >= 8");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N01(0.0, 1.0);
    RVec s(static_cast<std::size_t>(K) + 1), v(s.size(), 0.0);
    for (int k = 0; k <= K; ++k) s[static_cast<std::size_t>(k)] = static_cast<double>(k) / K;
    int deepest = std::max(1, static_cast<int>(std::log2(K)) - 3);
    const double pi = std::numbers::pi;
    bool any = false;
    while (!any) {
        if (U(rng) < 0.6) {
            int nb = 1 + static_cast<int>(U(rng) * 4.0);
            for (int b = 0; b < nb; ++b) {
                int n = static_cast<int>(U(rng) * (deepest + 1));
                double lo = 1.0 - std::ldexp(1.0, -n), hi = 1.0 - std::ldexp(1.0, -n - 1);
                double amp = std::exp(N01(rng)) * std::ldexp(1.0, n / 2);
                for (std::size_t k = 0; k < s.size(); ++k)
                    if (s[k] > lo && s[k] < hi) v[k] += amp * std::pow(std::sin(pi * (s[k] - lo) / (hi - lo)), 2);
            }
            any = true;
        }
        if (U(rng) < 0.5) {
            int nt = 1 + static_cast<int>(U(rng) * 5.0);
            double c = U(rng);
            for (int j = 0; j < nt; ++j) {
                double a = N01(rng), f = 1 + static_cast<int>(U(rng) * 8.0), ph = 2.0 * pi * U(rng);
                for (std::size_t k = 0; k < s.size(); ++k) v[k] += std::abs(c + a * std::sin(f * pi * s[k] + ph)) / nt;
            }
            any = true;
        }
        if (U(rng) < 0.3) {
            double beta = 0.45 * U(rng), amp = std::exp(N01(rng));
            for (std::size_t k = 0; k < s.size(); ++k) v[k] += amp * std::pow(std::max(1.0 - s[k], 0.5 / K), -beta);
            any = true;
        }
    }
    for (auto& x : s) x *= T / h;
    return TimeProfile(std::move(s), std::move(v));
}

}  // namespace fockcm
