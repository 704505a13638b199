#include "fockcm/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fockcm {

FockVector::FockVector(const GridSpec& g, int n_max) : grid(g), nmax(n_max) {
    if (n_max < 0) throw std::invalid_argument("fock: nmax must be >= 0");
    sectors.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) sectors.emplace_back(ipow(g.points(), n), cplx{});
}

double FockVector::weight(int n) const { return std::pow(grid.cell(), n); }

namespace {

void digits_of(std::size_t idx, int n, std::size_t P, std::size_t* out) {
    for (int j = n - 1; j >= 0; --j) {
        out[j] = idx % P;
        idx /= P;
    }
}

std::size_t index_of(const std::size_t* dig, int n, std::size_t P) {
    std::size_t idx = 0;
    for (int j = 0; j < n; ++j) idx = idx * P + dig[j];
    return idx;
}

void check_same(const FockVector& a, const FockVector& b) {
    if (!(a.grid == b.grid) || a.nmax != b.nmax) throw std::invalid_argument("fock: shape mismatch");
}

void check_function(const CVec& f, const GridSpec& g) {
    if (f.size() != g.points()) throw std::invalid_argument("fock: one-particle function has wrong size");
}

}  // namespace

CVec symmetrize(const CVec& t, int n, std::size_t P) {
    if (n <= 1) return t;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    CVec out(t.size(), cplx{});
    std::vector<std::size_t> dig(static_cast<std::size_t>(n)), pd(static_cast<std::size_t>(n));
    double count = 0.0;
    do {
        for (std::size_t idx = 0; idx < t.size(); ++idx) {
            digits_of(idx, n, P, dig.data());
            for (int j = 0; j < n; ++j) pd[static_cast<std::size_t>(j)] = dig[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            out[idx] += t[index_of(pd.data(), n, P)];
        }
        count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : out) v /= count;
    return out;
}

double sector_norm2(const FockVector& u, int n) {
    if (n == 0) return std::norm(u.vacuum);
    double s = 0.0;
    for (const auto& v : u.sector(n)) s += std::norm(v);
    return s * u.weight(n);
}

double fock_norm(const FockVector& u) {
    double s = 0.0;
    for (int n = 0; n <= u.nmax; ++n) s += sector_norm2(u, n);
    return std::sqrt(s);
}

cplx inner(const FockVector& u, const FockVector& v) {
    check_same(u, v);
    cplx s = std::conj(u.vacuum) * v.vacuum;
    for (int n = 1; n <= u.nmax; ++n) {
        cplx t{};
        const auto& a = u.sector(n);
        const auto& b = v.sector(n);
        for (std::size_t i = 0; i < a.size(); ++i) t += std::conj(a[i]) * b[i];
        s += t * u.weight(n);
    }
    return s;
}

namespace {

// Sector n+1 of a*(f) from symmetric sector n (n = 0 is the vacuum).
CVec raise(const CVec& f, const CVec& un, int n, std::size_t P) {
    const int m = n + 1;
    CVec out(ipow(P, m), cplx{});
    const double c = std::sqrt(static_cast<double>(m)) / m;
    std::vector<std::size_t> dig(static_cast<std::size_t>(m)), rest(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        digits_of(idx, m, P, dig.data());
        cplx s{};
        for (int j = 0; j < m; ++j) {
            int k = 0;
            for (int i = 0; i < m; ++i)
                if (i != j) rest[static_cast<std::size_t>(k++)] = dig[static_cast<std::size_t>(i)];
            s += f[dig[static_cast<std::size_t>(j)]] * un[index_of(rest.data(), n, P)];
        }
        out[idx] = c * s;
    }
    return out;
}

// Sector n-1 of a(g) from sector n.
CVec lower(const CVec& g, const CVec& un, int n, std::size_t P, double cell) {
    CVec out(ipow(P, n - 1), cplx{});
    const double c = std::sqrt(static_cast<double>(n)) * cell;
    for (std::size_t r = 0; r < out.size(); ++r) {
        cplx s{};
        const cplx* row = un.data() + r * P;
        for (std::size_t p = 0; p < P; ++p) s += std::conj(g[p]) * row[p];
        out[r] = c * s;
    }
    return out;
}

}  // namespace

FockVector create(const CVec& f, const FockVector& u) {
    check_function(f, u.grid);
    FockVector out(u.grid, u.nmax);
    out.dropped_mass = u.dropped_mass;
    if (u.nmax == 0) {
        out.dropped_mass += std::norm(u.vacuum) * lp_norm(f, u.grid, 2.0) * lp_norm(f, u.grid, 2.0);
        return out;
    }
    const std::size_t P = u.grid.points();
    out.sector(1) = raise(f, CVec{u.vacuum}, 0, P);
    for (int n = 1; n < u.nmax; ++n) out.sector(n + 1) = raise(f, u.sector(n), n, P);
    // Mass that would land in sector nmax+1: |f|^2 |u_N|^2 + |a(f) u_N|^2.
    const double f2 = std::pow(lp_norm(f, u.grid, 2.0), 2);
    const int N = u.nmax;
    CVec low = lower(f, u.sector(N), N, P, u.grid.cell());
    double low2 = 0.0;
    for (const auto& v : low) low2 += std::norm(v);
    low2 *= N == 1 ? 1.0 : u.weight(N - 1);
    out.dropped_mass += f2 * sector_norm2(u, N) + low2;
    return out;
}

FockVector annihilate(const CVec& g, const FockVector& u) {
    check_function(g, u.grid);
    FockVector out(u.grid, u.nmax);
    out.dropped_mass = u.dropped_mass;
    const std::size_t P = u.grid.points();
    for (int n = 1; n <= u.nmax; ++n) {
        CVec low = lower(g, u.sector(n), n, P, u.grid.cell());
        if (n == 1)
            out.vacuum = low[0];
        else
            out.sector(n - 1) = std::move(low);
    }
    return out;
}

FockVector field_op(const CVec& V, const FockVector& u, bool allow_complex) {
    if (!allow_complex)
        for (const auto& v : V)
            if (v.imag() != 0.0) throw std::invalid_argument("field_op: complex V requires allow_complex");
    FockVector a = annihilate(V, u);
    FockVector c = create(V, u);
    FockVector out = axpy(1.0, a, c);
    const double inv = 1.0 / std::sqrt(2.0);
    out.vacuum *= inv;
    for (auto& s : out.sectors)
        for (auto& v : s) v *= inv;
    out.dropped_mass = u.dropped_mass + 0.5 * (c.dropped_mass - u.dropped_mass);
    return out;
}

FockVector number_weight(double alpha, const FockVector& u) {
    if (std::abs(alpha) * u.nmax > 700.0) throw std::overflow_error("number_weight: |alpha| * nmax exceeds 700");
    FockVector out = u;
    for (int n = 1; n <= u.nmax; ++n) {
        const double w = std::exp(alpha * n);
        for (auto& v : out.sector(n)) v *= w;
    }
    return out;
}

FockVector chaos_scale(const FockVector& u, ChaosDirection dir) {
    FockVector out = u;
    double fact = 1.0;
    for (int n = 1; n <= u.nmax; ++n) {
        fact *= n;
        const double s = dir == ChaosDirection::pack ? std::sqrt(fact) : 1.0 / std::sqrt(fact);
        for (auto& v : out.sector(n)) v *= s;
    }
    return out;
}

FockVector axpy(cplx a, const FockVector& x, const FockVector& y) {
    check_same(x, y);
    FockVector out = y;
    out.vacuum += a * x.vacuum;
    for (int n = 1; n <= x.nmax; ++n) {
        auto& o = out.sector(n);
        const auto& s = x.sector(n);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * s[i];
    }
    out.dropped_mass = std::max(x.dropped_mass, y.dropped_mass);
    return out;
}

FockVector scaled(cplx a, const FockVector& x) {
    FockVector out = x;
    out.vacuum *= a;
    for (auto& s : out.sectors)
        for (auto& v : s) v *= a;
    return out;
}

FockVector product_state(const CVec& phi, int n, const GridSpec& g, int nmax) {
    check_function(phi, g);
    if (n < 0 || n > nmax) throw std::invalid_argument("product_state: n out of range");
    FockVector out(g, nmax);
    if (n == 0) {
        out.vacuum = 1.0;
        return out;
    }
    CVec t = phi;
    for (int k = 2; k <= n; ++k) {
        CVec next(t.size() * phi.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t p = 0; p < phi.size(); ++p) next[i * phi.size() + p] = t[i] * phi[p];
        t = std::move(next);
    }
    out.sector(n) = std::move(t);
    return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("read_dump: truncated stream");
    return v;
}

void put_c64(std::ostream& os, cplx v) {
    put(os, static_cast<float>(v.real()));
    put(os, static_cast<float>(v.imag()));
}

cplx get_c64(std::istream& is) {
    const float re = get<float>(is);
    const float im = get<float>(is);
    return {re, im};
}

}  // namespace

void write_dump(std::ostream& os, const FockVector& u) {
    os.write("FOCK", 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid.d));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid.M));
    put<double>(os, u.grid.delta);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(u.nmax));
    put_c64(os, u.vacuum);
    for (const auto& s : u.sectors)
        for (const auto& v : s) put_c64(os, v);
}

FockVector read_dump(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "FOCK", 4) != 0) throw std::runtime_error("read_dump: bad magic");
    if (get<std::uint32_t>(is) != 1) throw std::runtime_error("read_dump: unsupported version");
    GridSpec g;
    g.d = static_cast<int>(get<std::uint32_t>(is));
    g.M = static_cast<int>(get<std::uint32_t>(is));
    g.delta = get<double>(is);
    g.validate();
    const int nmax = static_cast<int>(get<std::uint32_t>(is));
    FockVector u(g, nmax);
    u.vacuum = get_c64(is);
    for (auto& s : u.sectors)
        for (auto& v : s) v = get_c64(is);
    return u;
}

}  // namespace fockcm
