#include "fockcm/center_of_mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fockcm {

namespace {

bool is_max_norm(double p) { return p <= 0.0 || std::isinf(p); }

void decode(std::size_t idx, const std::vector<int>& dims, int* out) {
    for (std::size_t a = dims.size(); a-- > 0;) {
        const auto n = static_cast<std::size_t>(dims[a]);
        out[a] = static_cast<int>(idx % n);
        idx /= n;
    }
}

std::size_t encode(const int* dig, const std::vector<int>& dims) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) idx = idx * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(dig[a]);
    return idx;
}

bool in_band(long long k, int M) { return k >= -M / 2 && k < M / 2; }

std::vector<int> lab_dims(const GridSpec& g, int n) { return std::vector<int>(static_cast<std::size_t>(g.d * n), g.M); }

std::vector<int> box_dims_of(const GridSpec& g, int n, int r) {
    std::vector<int> dims(static_cast<std::size_t>(g.d), g.M);
    for (int i = 0; i < g.d * (n - 1); ++i) dims.push_back(r * g.M);
    return dims;
}

std::size_t product(const std::vector<int>& dims) {
    std::size_t p = 1;
    for (int v : dims) p *= static_cast<std::size_t>(v);
    return p;
}

// Lab sector n -> CM box, exact for coefficients whose total momentum is in band.
// Returns the lab L^2 mass of the dropped coefficients through `dropped`.
CVec lab_to_box(const CVec& lab, int n, const GridSpec& g, int r, double& dropped) {
    if (n == 1) return lab;
    const int d = g.d;
    const int M = g.M;
    const auto ld = lab_dims(g, n);
    const auto bd = box_dims_of(g, n, r);
    const std::size_t NL = lab.size();
    const std::size_t NB = product(bd);
    CVec F = lab;
    fft_nd(F, ld, -1);
    CVec G(NB, cplx{});
    const double scale = static_cast<double>(NB) / static_cast<double>(NL);
    const double mass_unit = std::pow(g.cell(), n) / static_cast<double>(NL);
    std::vector<int> dig(ld.size()), out(bd.size());
    for (std::size_t idx = 0; idx < NL; ++idx) {
        if (F[idx] == cplx{}) continue;
        decode(idx, ld, dig.data());
        bool ok = true;
        for (int a = 0; a < d && ok; ++a) {
            long long K = 0;
            for (int j = 0; j < n; ++j) K += signed_freq(dig[static_cast<std::size_t>(j * d + a)], M);
            if (!in_band(K, M)) ok = false;
            out[static_cast<std::size_t>(a)] = static_cast<int>(wrap_index(K, M));
            const int kn = signed_freq(dig[static_cast<std::size_t>((n - 1) * d + a)], M);
            for (int j = 0; j < n - 1; ++j) {
                const int q = signed_freq(dig[static_cast<std::size_t>(j * d + a)], M) - kn;
                out[static_cast<std::size_t>(d + j * d + a)] = static_cast<int>(wrap_index(q, static_cast<long long>(r) * M));
            }
        }
        if (!ok) {
            dropped += std::norm(F[idx]) * mass_unit;
            continue;
        }
        G[encode(out.data(), bd)] += scale * F[idx];
    }
    fft_nd(G, bd, +1);
    const double inv = 1.0 / static_cast<double>(NB);
    for (auto& v : G) v *= inv;
    return G;
}

// Recover the lab frequencies of a box coefficient. Returns false when the
// coefficient has no lab preimage.
bool lab_freqs(const int* dig, int n, int d, int M, int r, std::vector<int>& k) {
    k.assign(static_cast<std::size_t>(n * d), 0);
    const long long RM = static_cast<long long>(r) * M;
    for (int a = 0; a < d; ++a) {
        const int K = signed_freq(dig[a], M);
        long long s = K;
        for (int j = 0; j < n - 1; ++j) s -= signed_freq(dig[d + j * d + a], RM);
        if (s % n != 0) return false;
        const long long kn = s / n;
        if (!in_band(kn, M)) return false;
        k[static_cast<std::size_t>((n - 1) * d + a)] = static_cast<int>(kn);
        for (int j = 0; j < n - 1; ++j) {
            const long long kj = signed_freq(dig[d + j * d + a], RM) + kn;
            if (!in_band(kj, M)) return false;
            k[static_cast<std::size_t>(j * d + a)] = static_cast<int>(kj);
        }
    }
    return true;
}

CVec box_to_lab(const CVec& box, int n, const GridSpec& g, int r) {
    if (n == 1) return box;
    const int d = g.d;
    const int M = g.M;
    const auto ld = lab_dims(g, n);
    const auto bd = box_dims_of(g, n, r);
    const std::size_t NL = product(ld);
    const std::size_t NB = box.size();
    CVec G = box;
    fft_nd(G, bd, -1);
    CVec F(NL, cplx{});
    const double scale = static_cast<double>(NL) / static_cast<double>(NB);
    std::vector<int> dig(bd.size()), k, ldig(ld.size());
    for (std::size_t idx = 0; idx < NB; ++idx) {
        if (G[idx] == cplx{}) continue;
        decode(idx, bd, dig.data());
        if (!lab_freqs(dig.data(), n, d, M, r, k)) continue;
        for (std::size_t i = 0; i < k.size(); ++i) ldig[i] = static_cast<int>(wrap_index(k[i], M));
        F[encode(ldig.data(), ld)] += scale * G[idx];
    }
    fft_nd(F, ld, +1);
    const double inv = 1.0 / static_cast<double>(NL);
    for (auto& v : F) v *= inv;
    return F;
}

CVec forward_fft(const CVec& f, const GridSpec& g) {
    CVec h = f;
    fft_nd(h, std::vector<int>(static_cast<std::size_t>(g.d), g.M), -1);
    return h;
}

// a_G(V) on one sector n >= 2, result is the sector n-1 box.
CVec lower_box(const CVec& Vhat, const CVec& box, int n, const CMFockVector& v) {
    const GridSpec& g = v.grid;
    const int d = g.d;
    const int M = g.M;
    const int r = v.r(n);
    const int ro = n - 1 >= 2 ? v.r(n - 1) : 1;
    const auto bd = box_dims_of(g, n, r);
    const auto od = box_dims_of(g, n - 1, ro);
    const std::size_t NB = product(bd);
    const std::size_t NO = product(od);
    CVec G = box;
    fft_nd(G, bd, -1);
    CVec H(NO, cplx{});
    const double c = static_cast<double>(NO) / static_cast<double>(NB) * std::sqrt(static_cast<double>(n)) * g.cell();
    std::vector<int> dig(bd.size()), k, odig(od.size()), vdig(static_cast<std::size_t>(d));
    const std::vector<int> vd(static_cast<std::size_t>(d), M);
    for (std::size_t idx = 0; idx < NB; ++idx) {
        if (G[idx] == cplx{}) continue;
        decode(idx, bd, dig.data());
        if (!lab_freqs(dig.data(), n, d, M, r, k)) continue;
        bool ok = true;
        for (int a = 0; a < d; ++a) {
            const int kn = k[static_cast<std::size_t>((n - 1) * d + a)];
            const long long Kp = static_cast<long long>(signed_freq(dig[static_cast<std::size_t>(a)], M)) - kn;
            if (!in_band(Kp, M)) ok = false;
            odig[static_cast<std::size_t>(a)] = static_cast<int>(wrap_index(Kp, M));
            vdig[static_cast<std::size_t>(a)] = static_cast<int>(wrap_index(kn, M));
            const int klast = k[static_cast<std::size_t>((n - 2) * d + a)];
            for (int j = 0; j < n - 2; ++j) {
                const int q = k[static_cast<std::size_t>(j * d + a)] - klast;
                odig[static_cast<std::size_t>(d + j * d + a)] = static_cast<int>(wrap_index(q, static_cast<long long>(ro) * M));
            }
        }
        if (!ok) continue;
        H[encode(odig.data(), od)] += c * std::conj(Vhat[encode(vdig.data(), vd)]) * G[idx];
    }
    fft_nd(H, od, +1);
    const double inv = 1.0 / static_cast<double>(NO);
    for (auto& x : H) x *= inv;
    return H;
}

cplx contract_one(const CVec& V, const CVec& f1, const GridSpec& g) {
    cplx s{};
    for (std::size_t i = 0; i < f1.size(); ++i) s += std::conj(V[i]) * f1[i];
    return s * g.cell();
}

// Sector m box with free coordinate j replaced by the derived coordinate.
CVec swap_with_derived(const CVec& T, int m, int j, const GridSpec& g, int r) {
    const int d = g.d;
    const auto bd = box_dims_of(g, m, r);
    const long long RM = static_cast<long long>(r) * g.M;
    CVec out(T.size());
    std::vector<int> dig(bd.size());
    for (std::size_t idx = 0; idx < T.size(); ++idx) {
        decode(idx, bd, dig.data());
        for (int a = 0; a < d; ++a) {
            long long s = 0;
            for (int i = 0; i < m - 1; ++i) s += dig[static_cast<std::size_t>(d + i * d + a)];
            dig[static_cast<std::size_t>(d + j * d + a)] = static_cast<int>(wrap_index(-s, RM));
        }
        out[idx] = T[encode(dig.data(), bd)];
    }
    return out;
}

CVec swap_free(const CVec& T, int m, int i, int j, const GridSpec& g, int r) {
    const int d = g.d;
    const auto bd = box_dims_of(g, m, r);
    CVec out(T.size());
    std::vector<int> dig(bd.size());
    for (std::size_t idx = 0; idx < T.size(); ++idx) {
        decode(idx, bd, dig.data());
        for (int a = 0; a < d; ++a)
            std::swap(dig[static_cast<std::size_t>(d + i * d + a)], dig[static_cast<std::size_t>(d + j * d + a)]);
        out[idx] = T[encode(dig.data(), bd)];
    }
    return out;
}

// a_G^*(V) from sector n >= 1 to sector n+1, symmetrized.
CVec raise_box(const CVec& Vhat, const CVec& box, int n, const CMFockVector& v) {
    const GridSpec& g = v.grid;
    const int d = g.d;
    const int M = g.M;
    const int m = n + 1;
    const int r = n >= 2 ? v.r(n) : 1;
    const int ro = v.r(m);
    const auto bd = box_dims_of(g, n, r);
    const auto od = box_dims_of(g, m, ro);
    const std::size_t NB = product(bd);
    const std::size_t NO = product(od);
    const std::size_t P = g.points();
    const long long RO = static_cast<long long>(ro) * M;
    CVec G = box;
    fft_nd(G, bd, -1);
    CVec H(NO, cplx{});
    const double c = static_cast<double>(NO) / (static_cast<double>(P) * static_cast<double>(NB));
    std::vector<int> dig(bd.size()), k, odig(od.size()), pdig(static_cast<std::size_t>(d));
    const std::vector<int> vd(static_cast<std::size_t>(d), M);
    for (std::size_t idx = 0; idx < NB; ++idx) {
        if (G[idx] == cplx{}) continue;
        decode(idx, bd, dig.data());
        if (!lab_freqs(dig.data(), n, d, M, r, k)) continue;
        for (std::size_t pf = 0; pf < P; ++pf) {
            decode(pf, vd, pdig.data());
            bool ok = true;
            for (int a = 0; a < d && ok; ++a) {
                const int p = signed_freq(pdig[static_cast<std::size_t>(a)], M);
                const long long Ko = static_cast<long long>(signed_freq(dig[static_cast<std::size_t>(a)], M)) + p;
                if (!in_band(Ko, M)) {
                    ok = false;
                    break;
                }
                odig[static_cast<std::size_t>(a)] = static_cast<int>(wrap_index(Ko, M));
                for (int j = 0; j < n; ++j) {
                    const long long q = static_cast<long long>(k[static_cast<std::size_t>(j * d + a)]) - p;
                    odig[static_cast<std::size_t>(d + j * d + a)] = static_cast<int>(wrap_index(q, RO));
                }
            }
            if (!ok) continue;
            H[encode(odig.data(), od)] += c * Vhat[pf] * G[idx];
        }
    }
    fft_nd(H, od, +1);
    const double inv = 1.0 / static_cast<double>(NO);
    for (auto& x : H) x *= inv;
    // T is symmetric in its first n coordinates, so averaging over the
    // transpositions with the new one gives the full symmetrization.
    CVec S = H;
    for (int j = 0; j < n; ++j) {
        CVec Tj = swap_with_derived(H, m, j, g, ro);
        for (std::size_t i = 0; i < S.size(); ++i) S[i] += Tj[i];
    }
    const double s = std::sqrt(static_cast<double>(m)) / m;
    for (auto& x : S) x *= s;
    return S;
}

double box_norm2(const CMFockVector& v, const CVec& box, int n) {
    double s = 0.0;
    for (const auto& x : box) s += std::norm(x);
    return s * v.grid.cell() * v.rel_weight(n);
}

double lq_over_yG(const CVec& box, std::size_t R, std::size_t rho, std::size_t P, double cell, double q) {
    if (is_max_norm(q)) {
        double m = 0.0;
        for (std::size_t gi = 0; gi < P; ++gi) m = std::max(m, std::abs(box[gi * R + rho]));
        return m;
    }
    double s = 0.0;
    for (std::size_t gi = 0; gi < P; ++gi) s += std::pow(std::abs(box[gi * R + rho]), q);
    return std::pow(s * cell, 1.0 / q);
}

// Outer accumulator for an L^p sum (or max).
struct Outer {
    double p;
    double acc = 0.0;
    void add(double w, double x) {
        if (is_max_norm(p))
            acc = std::max(acc, x);
        else
            acc += w * std::pow(x, p);
    }
    double value() const { return is_max_norm(p) ? acc : std::pow(acc, 1.0 / p); }
};

void accumulate_sector(const CMFockVector& v, int n, Outer& o, double q) {
    const std::size_t P = v.grid.points();
    if (n == 0) {
        for (const auto& s : v.slots) o.add(s.weight, std::abs(s.vacuum));
        return;
    }
    const std::size_t R = v.rel_points(n);
    const double w = v.rel_weight(n);
    for (int si = 0; si < v.nslots(); ++si) {
        const auto& box = v.sector(si, n);
        for (std::size_t rho = 0; rho < R; ++rho)
            o.add(v.slots[static_cast<std::size_t>(si)].weight * w, lq_over_yG(box, R, rho, P, v.grid.cell(), q));
    }
}

void check_same(const CMFockVector& a, const CMFockVector& b) {
    if (!(a.grid == b.grid) || a.nmax != b.nmax || a.refine != b.refine || a.slots.size() != b.slots.size())
        throw std::invalid_argument("center_of_mass: shape mismatch");
}

}  // namespace

std::vector<int> default_refine(int nmax) {
    std::vector<int> r(static_cast<std::size_t>(std::max(nmax, 0)));
    for (int n = 1; n <= nmax; ++n) r[static_cast<std::size_t>(n - 1)] = n;
    return r;
}

CMFockVector::CMFockVector(const GridSpec& g, int n_max, int nslots, std::vector<int> refine_factors)
    : grid(g), nmax(n_max), refine(refine_factors.empty() ? default_refine(n_max) : std::move(refine_factors)) {
    if (n_max < 0 || nslots < 1) throw std::invalid_argument("center_of_mass: bad nmax or slot count");
    if (static_cast<int>(refine.size()) < n_max)
        throw std::invalid_argument("center_of_mass: refinement factor mismatch (too few factors)");
    refine.resize(static_cast<std::size_t>(n_max));
    if (n_max >= 1) refine[0] = 1;
    for (int n = 2; n <= n_max; ++n)
        if (r(n) < 2) throw std::invalid_argument("center_of_mass: refinement factor mismatch (need r >= 2 for n >= 2)");
    slots.resize(static_cast<std::size_t>(nslots));
    for (auto& s : slots) {
        s.xi.assign(static_cast<std::size_t>(g.d), 0.0);
        for (int n = 1; n <= n_max; ++n) s.sectors.emplace_back(sector_size(n), cplx{});
    }
}

std::size_t CMFockVector::rel_points(int n) const {
    return n <= 1 ? 1 : ipow(static_cast<std::size_t>(r(n)) * static_cast<std::size_t>(grid.M), grid.d * (n - 1));
}

double CMFockVector::rel_weight(int n) const { return n <= 1 ? 1.0 : std::pow(rel_spacing(n), grid.d * (n - 1)); }

std::vector<int> CMFockVector::box_dims(int n) const { return box_dims_of(grid, n, n >= 2 ? r(n) : 1); }

CMFockVector to_cm(const FockVector& u, const std::vector<int>& refine, const RVec& xi) {
    return to_cm_slots({u}, {xi}, {1.0}, refine);
}

CMFockVector to_cm_slots(const std::vector<FockVector>& us, const std::vector<RVec>& xis, const RVec& weights,
                         const std::vector<int>& refine) {
    if (us.empty()) throw std::invalid_argument("to_cm: no slots");
    const GridSpec& g = us.front().grid;
    const int nmax = us.front().nmax;
    CMFockVector v(g, nmax, static_cast<int>(us.size()), refine);
    for (std::size_t s = 0; s < us.size(); ++s) {
        const FockVector& u = us[s];
        if (!(u.grid == g) || u.nmax != nmax) throw std::invalid_argument("to_cm: slots disagree on shape");
        auto& slot = v.slots[s];
        if (s < xis.size() && !xis[s].empty()) {
            if (static_cast<int>(xis[s].size()) != g.d) throw std::invalid_argument("to_cm: xi has wrong dimension");
            slot.xi = xis[s];
        }
        if (s < weights.size()) slot.weight = weights[s];
        slot.vacuum = u.vacuum;
        double dropped = 0.0;
        for (int n = 1; n <= nmax; ++n) slot.sectors[static_cast<std::size_t>(n - 1)] = lab_to_box(u.sector(n), n, g, v.r(n), dropped);
        v.dropped_mass += slot.weight * (dropped + u.dropped_mass);
    }
    return v;
}

FockVector from_cm(const CMFockVector& v, int slot) {
    FockVector u(v.grid, v.nmax);
    const auto& s = v.slots.at(static_cast<std::size_t>(slot));
    u.vacuum = s.vacuum;
    for (int n = 1; n <= v.nmax; ++n) u.sector(n) = box_to_lab(s.sectors[static_cast<std::size_t>(n - 1)], n, v.grid, v.r(n));
    return u;
}

cplx mu_integral(const CVec& g, int n, const GridSpec& grid, int r) {
    if (n < 1) throw std::invalid_argument("mu_integral: n must be >= 1");
    if (n == 1) return g.at(0);
    if (r < 2) throw std::invalid_argument("mu_integral: refinement factor mismatch");
    const std::size_t R = ipow(static_cast<std::size_t>(r) * static_cast<std::size_t>(grid.M), grid.d * (n - 1));
    if (g.size() != R) throw std::invalid_argument("mu_integral: wrong lattice size");
    cplx s{};
    for (const auto& x : g) s += x;
    return s * std::pow(static_cast<double>(n), grid.d) * std::pow(grid.delta / r, grid.d * (n - 1));
}

CMFockVector ag_apply(const CVec& V, const CMFockVector& v) {
    if (V.size() != v.grid.points()) throw std::invalid_argument("ag_apply: V has wrong size");
    CMFockVector out = cm_zero_like(v);
    out.dropped_mass = v.dropped_mass;
    const CVec Vhat = forward_fft(V, v.grid);
    for (int si = 0; si < v.nslots(); ++si) {
        auto& os = out.slots[static_cast<std::size_t>(si)];
        if (v.nmax >= 1) os.vacuum = contract_one(V, v.sector(si, 1), v.grid);
        for (int n = 2; n <= v.nmax; ++n) os.sectors[static_cast<std::size_t>(n - 2)] = lower_box(Vhat, v.sector(si, n), n, v);
    }
    return out;
}

CMFockVector ag_star_apply(const CVec& V, const CMFockVector& v) {
    if (V.size() != v.grid.points()) throw std::invalid_argument("ag_star_apply: V has wrong size");
    CMFockVector out = cm_zero_like(v);
    out.dropped_mass = v.dropped_mass;
    const CVec Vhat = forward_fft(V, v.grid);
    const double V2 = std::pow(lp_norm(V, v.grid, 2.0), 2);
    for (int si = 0; si < v.nslots(); ++si) {
        const auto& is = v.slots[static_cast<std::size_t>(si)];
        auto& os = out.slots[static_cast<std::size_t>(si)];
        if (v.nmax == 0) {
            out.dropped_mass += is.weight * std::norm(is.vacuum) * V2;
            continue;
        }
        auto& s1 = os.sectors[0];
        for (std::size_t i = 0; i < s1.size(); ++i) s1[i] = is.vacuum * V[i];
        for (int n = 1; n < v.nmax; ++n) os.sectors[static_cast<std::size_t>(n)] = raise_box(Vhat, v.sector(si, n), n, v);
        // Mass pushed past nmax: |V|^2 |f_N|^2 + |a_G(V) f_N|^2.
        const int N = v.nmax;
        const double fN = box_norm2(v, v.sector(si, N), N);
        double low = 0.0;
        if (N == 1) {
            low = std::norm(contract_one(V, v.sector(si, 1), v.grid));
        } else {
            low = box_norm2(v, lower_box(Vhat, v.sector(si, N), N, v), N - 1);
        }
        out.dropped_mass += is.weight * (V2 * fN + low);
    }
    return out;
}

double mixed_norm(const CMFockVector& v, double p, double q) {
    Outer o{p};
    for (int n = 0; n <= v.nmax; ++n) accumulate_sector(v, n, o, q);
    return o.value();
}

double sector_mixed_norm(const CMFockVector& v, int n, double p, double q) {
    Outer o{p};
    accumulate_sector(v, n, o, q);
    return o.value();
}

double swapped_sector_norm(const CMFockVector& v, int n, double p, double q) {
    if (n < 1) throw std::invalid_argument("swapped_sector_norm: n must be >= 1");
    const std::size_t P = v.grid.points();
    const std::size_t R = v.rel_points(n);
    const double w = v.rel_weight(n);
    Outer outer{q};
    for (std::size_t gi = 0; gi < P; ++gi) {
        Outer inner{p};
        for (int si = 0; si < v.nslots(); ++si) {
            const auto& box = v.sector(si, n);
            for (std::size_t rho = 0; rho < R; ++rho)
                inner.add(v.slots[static_cast<std::size_t>(si)].weight * w, std::abs(box[gi * R + rho]));
        }
        outer.add(v.grid.cell(), inner.value());
    }
    return outer.value();
}

cplx cm_inner(const CMFockVector& a, const CMFockVector& b) {
    check_same(a, b);
    cplx total{};
    for (int si = 0; si < a.nslots(); ++si) {
        const auto& sa = a.slots[static_cast<std::size_t>(si)];
        const auto& sb = b.slots[static_cast<std::size_t>(si)];
        cplx s = std::conj(sa.vacuum) * sb.vacuum;
        for (int n = 1; n <= a.nmax; ++n) {
            cplx t{};
            const auto& x = sa.sectors[static_cast<std::size_t>(n - 1)];
            const auto& y = sb.sectors[static_cast<std::size_t>(n - 1)];
            for (std::size_t i = 0; i < x.size(); ++i) t += std::conj(x[i]) * y[i];
            s += t * a.grid.cell() * a.rel_weight(n);
        }
        total += sa.weight * s;
    }
    return total;
}

double cm_sector_norm2(const CMFockVector& v, int n) {
    double s = 0.0;
    for (int si = 0; si < v.nslots(); ++si) {
        const auto& slot = v.slots[static_cast<std::size_t>(si)];
        s += slot.weight * (n == 0 ? std::norm(slot.vacuum) : box_norm2(v, slot.sectors[static_cast<std::size_t>(n - 1)], n));
    }
    return s;
}

double cm_norm(const CMFockVector& v) {
    double s = 0.0;
    for (int n = 0; n <= v.nmax; ++n) s += cm_sector_norm2(v, n);
    return std::sqrt(s);
}

CMFockVector cm_zero_like(const CMFockVector& v) {
    CMFockVector out = v;
    out.dropped_mass = 0.0;
    for (auto& s : out.slots) {
        s.vacuum = 0.0;
        for (auto& b : s.sectors) std::fill(b.begin(), b.end(), cplx{});
    }
    return out;
}

void cm_axpy_inplace(cplx a, const CMFockVector& x, CMFockVector& y) {
    check_same(x, y);
    for (std::size_t si = 0; si < x.slots.size(); ++si) {
        y.slots[si].vacuum += a * x.slots[si].vacuum;
        for (std::size_t n = 0; n < x.slots[si].sectors.size(); ++n) {
            auto& o = y.slots[si].sectors[n];
            const auto& s = x.slots[si].sectors[n];
            for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * s[i];
        }
    }
    y.dropped_mass = std::max(x.dropped_mass, y.dropped_mass);
}

CMFockVector cm_axpy(cplx a, const CMFockVector& x, const CMFockVector& y) {
    CMFockVector out = y;
    cm_axpy_inplace(a, x, out);
    return out;
}

CMFockVector cm_scaled(cplx a, const CMFockVector& x) {
    CMFockVector out = x;
    for (auto& s : out.slots) {
        s.vacuum *= a;
        for (auto& b : s.sectors)
            for (auto& e : b) e *= a;
    }
    return out;
}

CMFockVector cm_number_weight(double alpha, const CMFockVector& v) {
    if (std::abs(alpha) * v.nmax > 700.0) throw std::overflow_error("cm_number_weight: |alpha| * nmax exceeds 700");
    CMFockVector out = v;
    for (auto& s : out.slots)
        for (int n = 1; n <= v.nmax; ++n) {
            const double w = std::exp(alpha * n);
            for (auto& e : s.sectors[static_cast<std::size_t>(n - 1)]) e *= w;
        }
    return out;
}

CMFockVector cm_sector_only(const CMFockVector& v, int n) {
    CMFockVector out = cm_zero_like(v);
    for (std::size_t si = 0; si < v.slots.size(); ++si) {
        if (n == 0)
            out.slots[si].vacuum = v.slots[si].vacuum;
        else
            out.slots[si].sectors[static_cast<std::size_t>(n - 1)] = v.slots[si].sectors[static_cast<std::size_t>(n - 1)];
    }
    return out;
}

double cm_symmetry_defect(const CMFockVector& v) {
    double worst = 0.0;
    for (int si = 0; si < v.nslots(); ++si)
        for (int n = 2; n <= v.nmax; ++n) {
            const auto& T = v.sector(si, n);
            double scale = 0.0;
            for (const auto& x : T) scale = std::max(scale, std::abs(x));
            if (scale == 0.0) continue;
            std::vector<CVec> images;
            for (int j = 0; j + 1 < n - 1; ++j) images.push_back(swap_free(T, n, j, j + 1, v.grid, v.r(n)));
            images.push_back(swap_with_derived(T, n, n - 2, v.grid, v.r(n)));
            for (const auto& I : images)
                for (std::size_t i = 0; i < T.size(); ++i) worst = std::max(worst, std::abs(T[i] - I[i]) / scale);
        }
    return worst;
}

FockVector lab_total_derivative(const FockVector& u, int axis) {
    const GridSpec& g = u.grid;
    if (axis < 0 || axis >= g.d) throw std::invalid_argument("lab_total_derivative: bad axis");
    FockVector out(g, u.nmax);
    const double k0 = 2.0 * std::numbers::pi / g.L();
    for (int n = 1; n <= u.nmax; ++n) {
        const auto ld = lab_dims(g, n);
        CVec F = u.sector(n);
        fft_nd(F, ld, -1);
        std::vector<int> dig(ld.size());
        for (std::size_t idx = 0; idx < F.size(); ++idx) {
            decode(idx, ld, dig.data());
            double K = 0.0;
            for (int j = 0; j < n; ++j) K += signed_freq(dig[static_cast<std::size_t>(j * g.d + axis)], g.M);
            F[idx] *= k0 * K / static_cast<double>(F.size());
        }
        fft_nd(F, ld, +1);
        out.sector(n) = std::move(F);
    }
    return out;
}

CMFockVector cm_center_derivative(const CMFockVector& v, int axis) {
    const GridSpec& g = v.grid;
    if (axis < 0 || axis >= g.d) throw std::invalid_argument("cm_center_derivative: bad axis");
    CMFockVector out = cm_zero_like(v);
    const double k0 = 2.0 * std::numbers::pi / g.L();
    const std::vector<int> gd(static_cast<std::size_t>(g.d), g.M);
    const std::size_t P = g.points();
    std::vector<int> dig(static_cast<std::size_t>(g.d));
    for (int si = 0; si < v.nslots(); ++si)
        for (int n = 1; n <= v.nmax; ++n) {
            const std::size_t R = v.rel_points(n);
            CVec F = v.sector(si, n);
            fft_leading(F, gd, R, -1);
            for (std::size_t gi = 0; gi < P; ++gi) {
                decode(gi, gd, dig.data());
                const double m = k0 * signed_freq(dig[static_cast<std::size_t>(axis)], g.M) / static_cast<double>(P);
                for (std::size_t rho = 0; rho < R; ++rho) F[gi * R + rho] *= m;
            }
            fft_leading(F, gd, R, +1);
            out.sector(si, n) = std::move(F);
        }
    return out;
}

double LpExponents::rp() const { return 1.0 / (0.5 + 1.0 / qp - 1.0 / pp); }

void LpExponents::validate() const {
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    if (!(qp >= 1.0 && qp <= pp && pp <= 2.0)) throw std::invalid_argument("lp exponents: need 1 <= q' <= p' <= 2");
    if (!(p >= 2.0 && inv_q <= inv_p)) throw std::invalid_argument("lp exponents: need 2 <= p <= q <= inf");
    const double r = rp();
    if (!(r >= 1.0 - 1e-12 && r <= 2.0 + 1e-12)) throw std::invalid_argument("lp exponents: r' outside [1, 2]");
}

std::string LpExponents::label() const {
    std::ostringstream os;
    auto f = [&](double x) {
        if (std::isinf(x))
            os << "inf";
        else
            os << x;
    };
    os << "qp=";
    f(qp);
    os << ";pp=";
    f(pp);
    os << ";p=";
    f(p);
    os << ";q=";
    f(q);
    os << ";rp=";
    f(rp());
    return os.str();
}

std::vector<BoundRow> lp_bound_report(const CVec& V, const CMFockVector& v, const LpExponents& e, double alpha,
                                      double alpha_prime) {
    e.validate();
    if (!(alpha < alpha_prime)) throw std::invalid_argument("lp_bound_report: need alpha < alpha'");
    const GridSpec& g = v.grid;
    const double Vq = lp_norm(V, g, e.qp);
    const double Vr = lp_norm(V, g, e.rp());
    std::vector<BoundRow> rows;

    if (v.nmax >= 1) {
        const CMFockVector f0 = cm_sector_only(v, 0);
        const CMFockVector a0 = ag_star_apply(V, f0);
        rows.push_back({"borne-a-star0", sector_mixed_norm(a0, 1, 2.0, e.qp), Vq * sector_mixed_norm(v, 0, 2.0, 2.0)});
    }
    for (int n = 1; n < v.nmax; ++n) {
        const CMFockVector fn = cm_sector_only(v, n);
        const CMFockVector an = ag_star_apply(V, fn);
        rows.push_back({"borne-a-star(V)-n" + std::to_string(n), sector_mixed_norm(an, n + 1, 2.0, e.qp),
                        Vr * std::sqrt(n + 1.0) * sector_mixed_norm(v, n, 2.0, e.pp)});
    }
    if (v.nmax >= 1) {
        const CMFockVector a1 = ag_apply(V, cm_sector_only(v, 1));
        rows.push_back({"borne-a-1", sector_mixed_norm(a1, 0, 2.0, 2.0), Vq * sector_mixed_norm(v, 1, 2.0, e.q)});
    }
    for (int n = 2; n <= v.nmax; ++n) {
        const CMFockVector an = ag_apply(V, cm_sector_only(v, n));
        rows.push_back({"borne-a(V)-n" + std::to_string(n), sector_mixed_norm(an, n - 1, 2.0, e.p),
                        Vr * std::sqrt(static_cast<double>(n)) * sector_mixed_norm(v, n, 2.0, e.q)});
    }

    const double Vm = std::max(Vr, Vq);
    const double gap = alpha_prime - alpha;
    {
        // Drop the top sector so nothing is lost to truncation.
        CMFockVector f = v;
        if (v.nmax >= 1)
            for (auto& s : f.slots) std::fill(s.sectors.back().begin(), s.sectors.back().end(), cplx{});
        const double lhs = mixed_norm(cm_number_weight(alpha, ag_star_apply(V, f)), 2.0, e.qp);
        const double rhs = Vm * std::exp(alpha_prime) / (2.0 * std::sqrt(gap)) * mixed_norm(cm_number_weight(alpha_prime, f), 2.0, e.pp);
        rows.push_back({"expalphast", lhs, rhs});
    }
    {
        const double lhs = mixed_norm(cm_number_weight(alpha, ag_apply(V, v)), 2.0, e.p);
        const double rhs = Vm * std::exp(-alpha) / (2.0 * std::sqrt(gap)) * mixed_norm(cm_number_weight(alpha_prime, v), 2.0, e.q);
        rows.push_back({"expalpha", lhs, rhs});
    }
    return rows;
}

double young_lhs(const CVec& V, const CVec& phi, const GridSpec& g, double qp) {
    if (V.size() != g.points() || phi.size() != g.points()) throw std::invalid_argument("young_lhs: wrong sizes");
    const std::vector<int> gd(static_cast<std::size_t>(g.d), g.M);
    const std::size_t P = g.points();
    std::vector<int> ds(static_cast<std::size_t>(g.d)), dy(static_cast<std::size_t>(g.d)), dz(static_cast<std::size_t>(g.d));
    double outer = 0.0;
    for (std::size_t s = 0; s < P; ++s) {
        decode(s, gd, ds.data());
        Outer inner{qp};
        for (std::size_t y = 0; y < P; ++y) {
            decode(y, gd, dy.data());
            for (int a = 0; a < g.d; ++a) dz[static_cast<std::size_t>(a)] = (dy[static_cast<std::size_t>(a)] + ds[static_cast<std::size_t>(a)]) % g.M;
            inner.add(g.cell(), std::abs(V[encode(dz.data(), gd)] * phi[y]));
        }
        outer += g.cell() * std::pow(inner.value(), 2);
    }
    return std::sqrt(outer);
}

}  // namespace fockcm
