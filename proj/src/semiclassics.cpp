#include "fockcm/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fockcm {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<int> dims_of(const GridSpec& g) { return std::vector<int>(static_cast<std::size_t>(g.d), g.M); }

// One axis of the periodized packet, images with their own phase.
CVec packet_axis(const GridSpec& g, double h, double y0, double xi0) {
    CVec f(static_cast<std::size_t>(g.M));
    const double L = g.L();
    for (int i = 0; i < g.M; ++i) {
        cplx s{};
        for (int m = -3; m <= 3; ++m) {
            const double y = coord(g, i) + m * L;
            s += std::exp(-0.5 * h * (y - y0) * (y - y0)) * std::polar(1.0, xi0 * (y - 0.5 * y0));
        }
        f[static_cast<std::size_t>(i)] = s;
    }
    return f;
}

CVec tensor(const std::vector<CVec>& axes, const GridSpec& g) {
    CVec out(g.points());
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    for (std::size_t p = 0; p < out.size(); ++p) {
        unflatten(p, g, idx.data());
        cplx v = 1.0;
        for (int a = 0; a < g.d; ++a) v *= axes[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        out[p] = v;
    }
    return out;
}

void check_width(double h, const GridSpec& g) {
    if (!(h > 0.0)) throw std::invalid_argument("coherent state needs h > 0");
    const double sx = 1.0 / std::sqrt(h);
    if (sx < 2.0 * g.delta || sx > g.L() / 8.0)
        throw std::invalid_argument("packet width h^{-1/2} must lie in [2 delta, L / 8]");
}

// Accumulates w |<phi_X, psi>|^2 into H with the centred unit window G.
void accumulate(const CVec& psi, double w, const CVec& G, HusimiField& H) {
    const GridSpec& g = H.grid;
    const std::size_t P = g.points();
    const std::size_t nodes = H.x_nodes();
    const int Mc = g.M / H.coarsen;
    const double scale = std::pow(g.cell(), 2.0);
    std::vector<int> node(static_cast<std::size_t>(g.d)), idx(static_cast<std::size_t>(g.d));
    CVec buf(P);
    for (std::size_t j = 0; j < nodes; ++j) {
        std::size_t rest = j;
        for (int a = g.d - 1; a >= 0; --a) {
            node[static_cast<std::size_t>(a)] = static_cast<int>(rest % static_cast<std::size_t>(Mc)) * H.coarsen;
            rest /= static_cast<std::size_t>(Mc);
        }
        for (std::size_t p = 0; p < P; ++p) {
            unflatten(p, g, idx.data());
            std::size_t q = 0;
            for (int a = 0; a < g.d; ++a)
                q = q * static_cast<std::size_t>(g.M) +
                    wrap_index(idx[static_cast<std::size_t>(a)] - node[static_cast<std::size_t>(a)], g.M);
            buf[p] = G[q] * psi[p];
        }
        fft_nd(buf, dims_of(g), -1);
        double* row = H.values.data() + j * P;
        for (std::size_t k = 0; k < P; ++k) row[k] += w * scale * std::norm(buf[k]);
    }
}

HusimiField empty_field(const GridSpec& g, double h, int coarsen) {
    check_width(h, g);
    if (coarsen < 1 || g.M % coarsen != 0) throw std::invalid_argument("coarsen must divide M");
    HusimiField H;
    H.h = h;
    H.grid = g;
    H.coarsen = coarsen;
    H.values.assign(H.x_nodes() * g.points(), 0.0);
    return H;
}

CVec centred_window(const GridSpec& g, double h) {
    PhasePoint O{RVec(static_cast<std::size_t>(g.d), 0.0), RVec(static_cast<std::size_t>(g.d), 0.0)};
    return coherent_state(h, O, g).values;
}

// Offset slot j (signed) inside [-M/4, M/4).
bool in_window(std::size_t j, std::size_t M) {
    const long long sj = signed_freq(static_cast<long long>(j), static_cast<long long>(M));
    return 4 * sj >= -static_cast<long long>(M) && 4 * sj < static_cast<long long>(M);
}

// C-infinity step: 0 at x <= 0, 1 at x >= 1.
double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

}  // namespace

CoherentState coherent_state(double h, const PhasePoint& X0, const GridSpec& g) {
    check_width(h, g);
    const auto d = static_cast<std::size_t>(g.d);
    if (X0.x.size() != d || X0.xi.size() != d) throw std::invalid_argument("phase point dimension mismatch");
    std::vector<CVec> axes;
    for (std::size_t a = 0; a < d; ++a) axes.push_back(packet_axis(g, h, X0.x[a] / h, X0.xi[a]));
    CoherentState c;
    c.h = h;
    c.X0 = X0;
    c.values = tensor(axes, g);
    const double nrm = lp_norm(c.values, g, 2.0);
    c.defect = std::abs(1.0 - nrm);
    for (auto& v : c.values) v /= nrm;
    return c;
}

double coherent_overlap_sq(double h, const PhasePoint& X, const PhasePoint& Y) {
    double s = 0.0;
    for (std::size_t a = 0; a < X.x.size(); ++a) {
        s += (X.x[a] - Y.x[a]) * (X.x[a] - Y.x[a]);
        s += (X.xi[a] - Y.xi[a]) * (X.xi[a] - Y.xi[a]);
    }
    return std::exp(-s / (2.0 * h));
}

std::size_t HusimiField::x_nodes() const { return ipow(static_cast<std::size_t>(grid.M / coarsen), grid.d); }

double HusimiField::x_at(std::size_t j, int axis) const {
    const auto Mc = static_cast<std::size_t>(grid.M / coarsen);
    for (int a = grid.d - 1; a > axis; --a) j /= Mc;
    return h * coord(grid, static_cast<long long>((j % Mc) * static_cast<std::size_t>(coarsen)));
}

double HusimiField::xi_at(std::size_t k, int axis) const {
    const auto M = static_cast<std::size_t>(grid.M);
    for (int a = grid.d - 1; a > axis; --a) k /= M;
    return wavenumbers(grid)[k % M];
}

double HusimiField::cell() const { return std::pow(static_cast<double>(coarsen) / grid.M, grid.d); }

double HusimiField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell();
}

PhasePoint HusimiField::argmax() const {
    const auto it = std::max_element(values.begin(), values.end());
    const auto flat = static_cast<std::size_t>(it - values.begin());
    const std::size_t P = grid.points();
    PhasePoint X;
    for (int a = 0; a < grid.d; ++a) {
        X.x.push_back(x_at(flat / P, a));
        X.xi.push_back(xi_at(flat % P, a));
    }
    return X;
}

HusimiField husimi(const std::vector<CVec>& psis, const RVec& weights, const GridSpec& g, double h, int coarsen) {
    if (psis.size() != weights.size()) throw std::invalid_argument("husimi: one weight per wave function");
    HusimiField H = empty_field(g, h, coarsen);
    const CVec G = centred_window(g, h);
    for (std::size_t j = 0; j < psis.size(); ++j) {
        if (psis[j].size() != g.points()) throw std::invalid_argument("husimi: wave function size mismatch");
        accumulate(psis[j], weights[j], G, H);
    }
    return H;
}

HusimiField husimi(const CMFockVector& v, double h, int coarsen) {
    const GridSpec& g = v.grid;
    HusimiField H = empty_field(g, h, coarsen);
    const CVec G = centred_window(g, h);
    const std::size_t P = g.points();
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    for (const auto& s : v.slots) {
        // e^{-i xi.y} carrier; periodic only on the wavenumber lattice
        CVec carrier(P, 1.0);
        for (std::size_t a = 0; a < s.xi.size(); ++a) {
            const double m = s.xi[a] * g.L() / (2.0 * pi);
            if (std::abs(m - std::round(m)) > 1e-9) throw std::invalid_argument("husimi: slot xi off the wavenumber lattice");
        }
        for (std::size_t p = 0; p < P; ++p) {
            unflatten(p, g, idx.data());
            double ph = 0.0;
            for (std::size_t a = 0; a < s.xi.size(); ++a) ph += s.xi[a] * coord(g, idx[a]);
            carrier[p] = std::polar(1.0, -ph);
        }
        if (std::norm(s.vacuum) > 0.0) {
            CVec psi(P);
            const double amp = 1.0 / std::sqrt(std::pow(g.L(), g.d));
            for (std::size_t p = 0; p < P; ++p) psi[p] = s.vacuum * amp * carrier[p];
            accumulate(psi, s.weight, G, H);
        }
        for (int n = 1; n <= v.nmax; ++n) {
            const CVec& box = s.sectors[static_cast<std::size_t>(n - 1)];
            const std::size_t R = v.rel_points(n);
            const double w = s.weight * v.rel_weight(n);
            CVec psi(P);
            for (std::size_t r = 0; r < R; ++r) {
                double m2 = 0.0;
                for (std::size_t p = 0; p < P; ++p) {
                    psi[p] = box[p * R + r] * carrier[p];
                    m2 += std::norm(psi[p]);
                }
                if (m2 > 0.0) accumulate(psi, w, G, H);
            }
        }
    }
    return H;
}

CVec wigner_pair(const CVec& v, const CVec& u, const GridSpec& g) {
    if (g.d != 1) throw std::invalid_argument("wigner_pair is implemented for d = 1");
    const auto M = static_cast<std::size_t>(g.M);
    if (u.size() != M || v.size() != M) throw std::invalid_argument("wigner_pair: size mismatch");
    CVec W(M * M);
    CVec row(M);
    for (std::size_t m = 0; m < M; ++m) {
        // offsets |s| < L / 2 only, so the two factors never wrap onto each other
        for (std::size_t j = 0; j < M; ++j)
            row[j] = in_window(j, M) ? u[(m + j) % M] * std::conj(v[(m + M - j) % M]) : cplx{};
        fft_nd(row, {g.M}, -1);
        for (std::size_t k = 0; k < M; ++k) W[m * M + k] = 2.0 * g.delta * row[k];
    }
    return W;
}

double wigner_xi(const GridSpec& g, std::size_t k) { return pi * signed_freq(static_cast<long long>(k), g.M) / g.L(); }

cplx wigner_pairing(const CVec& a, const CVec& W, const GridSpec& g) {
    if (a.size() != W.size()) throw std::invalid_argument("wigner_pairing: size mismatch");
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * W[i];
    return s * g.delta / (2.0 * g.L());
}

CVec sample_symbol(const std::function<cplx(double, double)>& a, const GridSpec& g, double h) {
    if (g.d != 1) throw std::invalid_argument("sample_symbol is implemented for d = 1");
    const auto M = static_cast<std::size_t>(g.M);
    CVec out(M * M);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < M; ++k) out[m * M + k] = a(h * coord(g, static_cast<long long>(m)), wigner_xi(g, k));
    return out;
}

CVec weyl_apply(const CVec& a, const CVec& psi, const GridSpec& g) {
    if (g.d != 1) throw std::invalid_argument("weyl_apply is implemented for d = 1");
    const auto M = static_cast<std::size_t>(g.M);
    if (a.size() != M * M || psi.size() != M) throw std::invalid_argument("weyl_apply: size mismatch");
    // A(m, j): FFT of the symbol row m in xi, i.e. its kernel in the offset variable
    CVec A(M * M);
    CVec row(M);
    for (std::size_t m = 0; m < M; ++m) {
        std::copy(a.begin() + static_cast<std::ptrdiff_t>(m * M), a.begin() + static_cast<std::ptrdiff_t>((m + 1) * M), row.begin());
        fft_nd(row, {g.M}, -1);
        std::copy(row.begin(), row.end(), A.begin() + static_cast<std::ptrdiff_t>(m * M));
    }
    CVec out(M);
    for (std::size_t p = 0; p < M; ++p) {
        cplx s{};
        for (std::size_t j = 0; j < M; ++j)
            if (in_window(j, M)) s += A[((p + j) % M) * M + j] * psi[(p + 2 * j) % M];
        out[p] = s / static_cast<double>(M);
    }
    return out;
}

double EnergyBand::chi(double E) const {
    if (whole) return 1.0;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : intervals) dist = std::min(dist, std::max({lo - E, E - hi, 0.0}));
    if (dist == 0.0) return 1.0;
    if (!(width > 0.0)) return 0.0;
    return smooth_step(1.0 - dist / width);
}

BandMass energy_band_mass(const CVec& psi, const GridSpec& g, const EnergyBand& F) {
    if (psi.size() != g.points()) throw std::invalid_argument("energy_band_mass: size mismatch");
    CVec Fk = psi;
    fft_nd(Fk, dims_of(g), -1);
    const RVec k = wavenumbers(g);
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    const double w = g.cell() / static_cast<double>(g.points());
    BandMass out;
    for (std::size_t p = 0; p < Fk.size(); ++p) {
        unflatten(p, g, idx.data());
        double E = 0.0;
        for (int a = 0; a < g.d; ++a) E += k[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] * k[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        const double m = w * std::norm(Fk[p]);
        const double c = F.chi(E);
        out.inside += c * m;
        out.outside += (1.0 - c) * m;
    }
    return out;
}

BandMass energy_band_mass(const CMFockVector& v, const EnergyBand& F) {
    const GridSpec& g = v.grid;
    const RVec k = wavenumbers(g);
    const std::size_t P = g.points();
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    BandMass out;
    auto add = [&](double E, double m) {
        const double c = F.chi(E);
        out.inside += c * m;
        out.outside += (1.0 - c) * m;
    };
    for (const auto& s : v.slots) {
        auto energy = [&](std::size_t p) {
            unflatten(p, g, idx.data());
            double E = 0.0;
            for (int a = 0; a < g.d; ++a) {
                const double x = (s.xi.empty() ? 0.0 : s.xi[static_cast<std::size_t>(a)]) - k[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
                E += x * x;
            }
            return E;
        };
        double xi2 = 0.0;
        for (double x : s.xi) xi2 += x * x;
        add(xi2, s.weight * std::norm(s.vacuum));
        for (int n = 1; n <= v.nmax; ++n) {
            CVec box = s.sectors[static_cast<std::size_t>(n - 1)];
            const std::size_t R = v.rel_points(n);
            fft_leading(box, dims_of(g), R, -1);
            const double w = s.weight * g.cell() * v.rel_weight(n) / static_cast<double>(P);
            for (std::size_t p = 0; p < P; ++p) {
                double m = 0.0;
                for (std::size_t r = 0; r < R; ++r) m += std::norm(box[p * R + r]);
                add(energy(p), w * m);
            }
        }
    }
    return out;
}

}  // namespace fockcm
