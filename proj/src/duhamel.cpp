#include "fockcm/duhamel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "fockcm/generators.hpp"
#include "fockcm/propagator.hpp"

namespace fockcm {

namespace {

const cplx I{0.0, 1.0};

CMFockVector chi_apply(const CMFockVector& v, double eps, ChiKind kind) {
    if (eps <= 0.0) return v;
    CMFockVector out = v;
    for (auto& s : out.slots) {
        s.vacuum *= chi_value(kind, eps, 0);
        for (int n = 1; n <= v.nmax; ++n) {
            const double c = chi_value(kind, eps, n);
            for (auto& x : s.sectors[static_cast<std::size_t>(n - 1)]) x *= c;
        }
    }
    return out;
}

double weighted_norm(const CMFockVector& v, double alpha) {
    double s = 0.0;
    for (int n = 0; n <= v.nmax; ++n) s += std::exp(2.0 * alpha * n) * cm_sector_norm2(v, n);
    return std::sqrt(s);
}

SectorProfile profile_of(const RVec& times, const StateSeq& seq) {
    return sector_profile(Trajectory{times, seq});
}

StateSeq scaled_seq(cplx a, const StateSeq& x) {
    StateSeq out;
    out.reserve(x.size());
    for (const auto& v : x) out.push_back(cm_scaled(a, v));
    return out;
}

StateSeq map_seq(const StateSeq& x, const auto& f) {
    StateSeq out;
    out.reserve(x.size());
    for (const auto& v : x) out.push_back(f(v));
    return out;
}

void check_same_grid(const SystemTrajectory& u) {
    if (u.inf.size() != u.times.size() || u.two.size() != u.times.size() || u.one.size() != u.times.size())
        throw std::invalid_argument("system trajectory components differ in length");
}

// exp(-i dt W) v by Taylor series, W = interaction_apply.
CMFockVector interaction_exp(const CMFockVector& v, const PotentialPair& V, double h, double eps, ChiKind chi,
                             double dt) {
    CMFockVector out = v, term = v;
    const double scale = std::max(cm_norm(v), 1e-300);
    for (int k = 1; k < 200; ++k) {
        term = cm_scaled(-I * dt / static_cast<double>(k), interaction_apply(term, V, h, eps, chi));
        cm_axpy_inplace(1.0, term, out);
        if (cm_norm(term) < 1e-17 * scale) break;
    }
    out.dropped_mass = 0.0;
    return out;
}

// Norm rate leaving the top sector under sqrt(h) a_G^*(V1).
double leak_rate(const CMFockVector& v, const PotentialPair& V, double h) {
    CMFockVector top = cm_sector_only(v, v.nmax);
    top.dropped_mass = 0.0;
    CMFockVector r = ag_star_apply(V.V1, top);
    return std::sqrt(h * std::max(r.dropped_mass, 0.0));
}

}  // namespace

double chi_value(ChiKind kind, double eps, int n) {
    if (eps <= 0.0) return 1.0;
    if (kind == ChiKind::hard) return static_cast<double>(n) <= 1.0 / eps ? 1.0 : 0.0;
    return std::exp(-eps * n);
}

int SolverConfig::steps() const {
    return std::max(std::max(1, min_steps), static_cast<int>(std::ceil(window() / dt - 1e-9)));
}

RVec SolverConfig::times() const {
    const int K = steps();
    const double s = step();
    RVec t(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) t[static_cast<std::size_t>(k)] = s * k;
    return t;
}

void SolverConfig::validate(const GridSpec& g) const {
    weights().validate();
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
    if (nmax < 1) throw std::invalid_argument("nmax must be >= 1");
    if (eps < 0.0) throw std::invalid_argument("eps must be non-negative");
    double xmax = 0.0;
    for (const auto& x : xi) {
        double s = 0.0;
        for (double c : x) s += c * c;
        xmax = std::max(xmax, std::sqrt(s));
    }
    const double kmax = std::sqrt(static_cast<double>(g.d)) * std::numbers::pi / g.delta;
    const double omega = (kmax + xmax) * (kmax + xmax);
    if (step() > 2.0 * std::numbers::pi / (8.0 * omega))
        throw std::invalid_argument("dt resolves the fastest free phase with fewer than 8 samples per period");
}

double potential_bound(const CVec& V, const GridSpec& g) {
    const double rp = g.d >= 3 ? 2.0 * g.d / (g.d + 2.0) : 1.0;
    return 1.0 + lp_norm(V, g, rp);
}

StateSeq duhamel_integral(const StateSeq& phi, double dt) {
    StateSeq out;
    out.reserve(phi.size());
    if (phi.empty()) return out;
    CMFockVector acc = cm_zero_like(phi.front());
    out.push_back(acc);
    for (std::size_t m = 0; m + 1 < phi.size(); ++m) {
        CMFockVector tmp = acc;
        cm_axpy_inplace(0.5 * dt, phi[m], tmp);
        acc = evolve_free_fock(tmp, dt);
        cm_axpy_inplace(0.5 * dt, phi[m + 1], acc);
        out.push_back(acc);
    }
    return out;
}

StateSeq free_trajectory(const CMFockVector& u0, const RVec& times) {
    StateSeq out;
    out.reserve(times.size());
    for (double t : times) out.push_back(evolve_free_fock(u0, t));
    return out;
}

std::pair<StateSeq, StateSeq> rhs_build(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg) {
    const RVec t = cfg.times();
    const double sh = std::sqrt(cfg.h);
    StateSeq free = free_trajectory(u0, t);
    StateSeq phi = map_seq(free, [&](const CMFockVector& v) { return cm_scaled(sh, ag_star_apply(V.V1, v)); });
    StateSeq f_inf = scaled_seq(-I, duhamel_integral(phi, cfg.step()));
    StateSeq f_2;
    f_2.reserve(t.size());
    for (std::size_t m = 0; m < t.size(); ++m) f_2.push_back(ag_apply(V.V2, cm_axpy(1.0, f_inf[m], free[m])));
    return {std::move(f_inf), std::move(f_2)};
}

SystemTrajectory apply_L(const SystemTrajectory& u, const PotentialPair& V, const SolverConfig& cfg) {
    check_same_grid(u);
    const double sh = std::sqrt(cfg.h), dt = cfg.step();
    const std::size_t K = u.times.size();
    StateSeq phi_inf, phi_1;
    phi_inf.reserve(K);
    phi_1.reserve(K);
    for (std::size_t m = 0; m < K; ++m) {
        CMFockVector a = ag_star_apply(V.V1, u.inf[m]);
        // sqrt(h) a^* u_inf + sqrt(h) u_2 + u_1
        CMFockVector p = cm_scaled(sh, a);
        cm_axpy_inplace(sh, u.two[m], p);
        cm_axpy_inplace(1.0, u.one[m], p);
        phi_inf.push_back(std::move(p));
        // h a^* u_inf + sqrt(h) u_1
        CMFockVector q = cm_scaled(cfg.h, a);
        cm_axpy_inplace(sh, u.one[m], q);
        phi_1.push_back(std::move(q));
    }
    SystemTrajectory out;
    out.times = u.times;
    out.inf = scaled_seq(-I, duhamel_integral(phi_inf, dt));
    StateSeq d2 = duhamel_integral(u.two, dt);
    StateSeq d1 = duhamel_integral(phi_1, dt);
    out.two.reserve(K);
    out.one.reserve(K);
    for (std::size_t m = 0; m < K; ++m) {
        out.two.push_back(cm_scaled(-I * sh, ag_apply(V.V2, d2[m])));
        out.one.push_back(cm_scaled(-I, ag_apply(V.V2, d1[m])));
    }
    return out;
}

double system_M(const SystemTrajectory& u, const SolverConfig& cfg) {
    check_same_grid(u);
    return weighted_M_total(profile_of(u.times, u.inf), profile_of(u.times, u.two), profile_of(u.times, u.one),
                            cfg.weights(), cfg.sup);
}

PicardResult picard_solve(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg) {
    cfg.validate(u0.grid);
    PicardResult res;
    res.diag.contraction = contraction_ratio(u0, V, cfg);
    if (res.diag.contraction >= 0.9) throw ContractionError("gamma too large: contraction ratio >= 0.9", res.diag);
    auto [f_inf, f_2] = rhs_build(u0, V, cfg);
    SystemTrajectory delta;
    delta.times = cfg.times();
    delta.inf = std::move(f_inf);
    delta.two = std::move(f_2);
    delta.one = map_seq(delta.inf, [](const CMFockVector& v) { return cm_zero_like(v); });
    res.sol = delta;
    int above = 0;
    for (int k = 1; k <= cfg.max_iter; ++k) {
        if (k > 1) {
            delta = apply_L(delta, V, cfg);
            for (std::size_t m = 0; m < delta.times.size(); ++m) {
                cm_axpy_inplace(1.0, delta.inf[m], res.sol.inf[m]);
                cm_axpy_inplace(1.0, delta.two[m], res.sol.two[m]);
                cm_axpy_inplace(1.0, delta.one[m], res.sol.one[m]);
            }
        }
        const double inc = system_M(delta, cfg);
        auto& D = res.diag;
        D.increments.push_back(inc);
        D.iterations = k;
        if (D.increments.size() >= 2 && D.increments[D.increments.size() - 2] > 0.0) {
            const double r = inc / D.increments[D.increments.size() - 2];
            D.ratios.push_back(r);
            D.rho = std::max(D.rho, r);
            above = r >= 1.0 ? above + 1 : 0;
            if (above >= 3) throw ContractionError("Picard iteration is not contracting", D);
        }
        if (inc < cfg.tol) {
            D.converged = true;
            break;
        }
    }
    return res;
}

StateSeq reconstruct(const StateSeq& u_inf, const CMFockVector& u0, const RVec& times) {
    if (u_inf.size() != times.size()) throw std::invalid_argument("reconstruct: length mismatch");
    StateSeq out;
    out.reserve(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) out.push_back(cm_axpy(1.0, u_inf[m], evolve_free_fock(u0, times[m])));
    return out;
}

CMFockVector interaction_apply(const CMFockVector& v, const PotentialPair& V, double h, double eps, ChiKind chi) {
    CMFockVector cv = chi_apply(v, eps, chi);
    CMFockVector out = chi_apply(ag_star_apply(V.V1, cv), eps, chi);
    cm_axpy_inplace(1.0, chi_apply(ag_apply(V.V2, cv), eps, chi), out);
    out.dropped_mass = 0.0;
    return cm_scaled(std::sqrt(h), out);
}

ReferenceResult reference_integrate(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg,
                                    int substeps) {
    cfg.validate(u0.grid);
    if (substeps < 1) throw std::invalid_argument("substeps must be positive");
    ReferenceResult res;
    res.times = cfg.times();
    const double ds = cfg.step() / substeps;
    CMFockVector v = u0;
    v.dropped_mass = 0.0;
    res.states.push_back(v);
    res.leakage.push_back(0.0);
    double leak = 0.0, rate = leak_rate(v, V, cfg.h);
    for (std::size_t m = 1; m < res.times.size(); ++m) {
        for (int s = 0; s < substeps; ++s) {
            v = evolve_free_fock(v, 0.5 * ds);
            v = interaction_exp(v, V, cfg.h, cfg.eps, cfg.chi, ds);
            v = evolve_free_fock(v, 0.5 * ds);
        }
        const double r = leak_rate(v, V, cfg.h);
        leak += 0.5 * cfg.step() * (rate + r);
        rate = r;
        res.states.push_back(v);
        res.leakage.push_back(leak);
    }
    return res;
}

RVec identity_split_check(const SystemTrajectory& u, const StateSeq& uG, const PotentialPair& V, const SolverConfig& cfg) {
    check_same_grid(u);
    if (uG.size() != u.times.size()) throw std::invalid_argument("identity_split_check: length mismatch");
    const double sh = std::sqrt(cfg.h);
    RVec out;
    out.reserve(uG.size());
    for (std::size_t m = 0; m < uG.size(); ++m) {
        CMFockVector r = cm_scaled(sh, ag_apply(V.V2, uG[m]));
        cm_axpy_inplace(-1.0, u.one[m], r);
        cm_axpy_inplace(-sh, u.two[m], r);
        out.push_back(cm_norm(r));
    }
    return out;
}

ReferenceResult truncated_dynamics(const CMFockVector& u0, const CVec& V, const SolverConfig& cfg, int substeps) {
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("truncated_dynamics needs eps > 0");
    return reference_integrate(u0, PotentialPair::same(V), cfg, substeps);
}

RVec truncation_gap(const CMFockVector& u0, const CVec& V, const SolverConfig& cfg, int substeps) {
    SolverConfig plain = cfg;
    plain.eps = 0.0;
    auto u = reference_integrate(u0, PotentialPair::same(V), plain, substeps);
    auto v = truncated_dynamics(u0, V, cfg, substeps);
    RVec out;
    for (std::size_t m = 0; m < u.states.size(); ++m) out.push_back(cm_norm(cm_axpy(-1.0, v.states[m], u.states[m])));
    return out;
}

ExpansionResult expansion_check(const CMFockVector& u_t0, const PotentialPair& V, const SolverConfig& cfg,
                                const RVec& deltas, int steps, int terms) {
    if (steps < 2) throw std::invalid_argument("expansion_check: steps must be >= 2");
    if (terms < 4) throw std::invalid_argument("expansion_check: need at least 4 series terms");
    double dmax = 0.0;
    for (double delta : deltas) {
        if (delta < 0.0 || delta > cfg.gamma * (cfg.alpha1 - cfg.alpha0))
            throw std::invalid_argument("expansion_check: delta outside the solver window");
        dmax = std::max(dmax, delta);
    }
    ExpansionResult res;
    res.remainders.assign(3, RVec{});
    const double half = 0.5 * cfg.alpha1;
    const double ds = dmax > 0.0 ? dmax / cfg.h / steps : 0.0;
    // node index of every requested delta
    std::vector<int> node;
    for (double delta : deltas) node.push_back(ds > 0.0 ? static_cast<int>(std::lround(delta / cfg.h / ds)) : 0);
    for (int n : node) res.deltas.push_back(n * ds * cfg.h);

    auto W = [&](const CMFockVector& x) { return interaction_apply(x, V, cfg.h, cfg.eps, cfg.chi); };
    const auto J = static_cast<std::size_t>(terms);
    // D[j] is the j-th Dyson term at the current node, acc[j] its running trapezoid integral
    std::vector<CMFockVector> D(J), acc(J), phi(J);
    D[0] = u_t0;
    for (std::size_t j = 1; j < J; ++j) D[j] = cm_zero_like(u_t0), acc[j] = cm_zero_like(u_t0);
    for (std::size_t j = 0; j + 1 < J; ++j) phi[j] = W(D[j]);

    std::vector<std::array<double, 3>> at(static_cast<std::size_t>(steps) + 1);
    auto record = [&](int m) {
        CMFockVector r = cm_zero_like(u_t0);
        for (std::size_t j = J - 1; j >= 3; --j) cm_axpy_inplace(1.0, D[j], r);
        auto& out = at[static_cast<std::size_t>(m)];
        out[2] = weighted_norm(r, half);
        cm_axpy_inplace(1.0, D[2], r);
        out[1] = weighted_norm(r, half);
        cm_axpy_inplace(1.0, D[1], r);
        out[0] = weighted_norm(r, half);
        res.series_tail = std::max(res.series_tail, weighted_norm(D[J - 1], half));
    };
    record(0);
    const int last = node.empty() ? 0 : *std::max_element(node.begin(), node.end());
    for (int m = 0; m < last; ++m) {
        D[0] = evolve_free_fock(D[0], ds);
        std::vector<CMFockVector> next(J);
        next[0] = W(D[0]);
        for (std::size_t j = 1; j < J; ++j) {
            acc[j] = cm_axpy(0.5 * ds, next[j - 1], evolve_free_fock(cm_axpy(0.5 * ds, phi[j - 1], acc[j]), ds));
            D[j] = cm_scaled(-I, acc[j]);
            if (j + 1 < J) next[j] = W(D[j]);
        }
        phi = std::move(next);
        record(m + 1);
    }
    for (int n : node)
        for (std::size_t k = 0; k < 3; ++k) res.remainders[k].push_back(at[static_cast<std::size_t>(n)][k]);

    res.slopes.assign(3, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
        RVec xs, ys;
        for (std::size_t j = 0; j < node.size(); ++j)
            if (res.deltas[j] > 0.0 && res.remainders[k][j] > 0.0) {
                xs.push_back(res.deltas[j]);
                ys.push_back(res.remainders[k][j]);
            }
        if (xs.size() >= 2) res.slopes[k] = loglog_slope(xs, ys);
    }
    return res;
}

PerturbResult perturb_potential(const CMFockVector& u0, const PotentialPair& ref, const PotentialPair& other,
                                const SolverConfig& cfg) {
    const GridSpec& g = u0.grid;
    const double rp = g.d >= 3 ? 2.0 * g.d / (g.d + 2.0) : 1.0;
    auto diff = [&](const CVec& a, const CVec& b) {
        CVec d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return lp_norm(d, g, rp);
    };
    PerturbResult res;
    res.dV = diff(other.V1, ref.V1) + diff(other.V2, ref.V2);
    auto a = picard_solve(u0, ref, cfg);
    auto b = picard_solve(u0, other, cfg);
    for (std::size_t m = 0; m < a.sol.times.size(); ++m) {
        res.diff.push_back(cm_norm(cm_axpy(-1.0, a.sol.inf[m], b.sol.inf[m])));
        res.sup = std::max(res.sup, res.diff.back());
    }
    return res;
}

double probe_contraction(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, unsigned long long seed) {
    Rng rng(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    SystemTrajectory x;
    x.times = cfg.times();
    auto rnd = [&]() {
        CMFockVector v = cm_zero_like(like);
        for (auto& s : v.slots) {
            s.vacuum = {N01(rng), N01(rng)};
            for (auto& sec : s.sectors)
                for (auto& c : sec) c = {N01(rng), N01(rng)};
        }
        return cm_scaled(1.0 / cm_norm(v), v);
    };
    // smooth in time: one random profile per component times sqrt(ht)
    CMFockVector a = rnd(), b = rnd(), c = rnd();
    for (double t : x.times) {
        const double w = std::sqrt(cfg.h * t);
        x.inf.push_back(cm_scaled(w, evolve_free_fock(a, t)));
        x.two.push_back(evolve_free_fock(b, t));
        x.one.push_back(cm_scaled(w, evolve_free_fock(c, t)));
    }
    const double m0 = system_M(x, cfg);
    return m0 > 0.0 ? system_M(apply_L(x, V, cfg), cfg) / m0 : 0.0;
}

double contraction_ratio(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, int probes) {
    double r = 0.0;
    for (int s = 1; s <= probes; ++s) r = std::max(r, probe_contraction(like, V, cfg, static_cast<unsigned long long>(s)));
    return r;
}

double calibrate_gamma(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, double gamma_start,
                       double target) {
    SolverConfig c = cfg;
    c.gamma = gamma_start;
    for (int k = 0; k <= 20; ++k, c.gamma *= 0.5)
        if (contraction_ratio(like, V, c) <= target) return c.gamma;
    throw std::runtime_error("calibrate_gamma: no gamma reached the target ratio");
}

}  // namespace fockcm
