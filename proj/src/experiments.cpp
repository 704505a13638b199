#include "fockcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fockcm/generators.hpp"
#include "fockcm/mixed_norms.hpp"
#include "fockcm/propagator.hpp"
#include "fockcm/random_field.hpp"

namespace fockcm {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double max_diff(const FockVector& a, const FockVector& b) {
    double m = std::abs(a.vacuum - b.vacuum);
    for (int n = 1; n <= a.nmax; ++n)
        for (std::size_t i = 0; i < a.sector(n).size(); ++i) m = std::max(m, std::abs(a.sector(n)[i] - b.sector(n)[i]));
    return m;
}

double max_diff(const CMFockVector& a, const CMFockVector& b) {
    double m = 0.0;
    for (int s = 0; s < a.nslots(); ++s) {
        m = std::max(m, std::abs(a.slots[static_cast<std::size_t>(s)].vacuum - b.slots[static_cast<std::size_t>(s)].vacuum));
        for (int n = 1; n <= a.nmax; ++n)
            for (std::size_t i = 0; i < a.sector(s, n).size(); ++i)
                m = std::max(m, std::abs(a.sector(s, n)[i] - b.sector(s, n)[i]));
    }
    return m;
}

double max_abs(const CMFockVector& a) {
    CMFockVector z = cm_zero_like(a);
    return max_diff(a, z);
}

FockVector headroom(FockVector u) {
    std::fill(u.sectors.back().begin(), u.sectors.back().end(), cplx{});
    return u;
}

cplx l2_inner(const CVec& a, const CVec& b, const GridSpec& g) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s * g.cell();
}

std::string seed_tag(std::uint64_t seed) { return "seed=" + std::to_string(seed); }

double sup(const RVec& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

std::string hkey(double h) {
    std::ostringstream os;
    os << h;
    return os.str();
}

void check(SuiteResult& r, bool ok, const std::string& what) {
    if (!ok) r.failures.push_back(what);
}

SolverConfig prepared_solver(const ExperimentConfig& cfg, const CVec& V) {
    SolverConfig s = cfg.solver;
    s.C_V = potential_bound(V, cfg.grid);
    return s;
}

}  // namespace

double SuiteResult::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
        if (k == key) return v;
    throw std::out_of_range("SuiteResult: no metric '" + key + "'");
}

CsvTable& SuiteResult::table(const std::string& stem) {
    for (auto& [k, t] : tables)
        if (k == stem) return t;
    tables.emplace_back(stem, CsvTable{});
    return tables.back().second;
}

const CsvTable& SuiteResult::table(const std::string& stem) const {
    for (const auto& [k, t] : tables)
        if (k == stem) return t;
    throw std::out_of_range("SuiteResult: no table '" + stem + "'");
}

CVec build_potential(const ExperimentConfig& cfg) {
    const GridSpec& g = cfg.grid;
    const PotentialSpec& p = cfg.potential;
    CVec V;
    switch (p.kind) {
        case PotentialKind::random: {
            Rng rng(split_seed(cfg.seed, kPotentialStream));
            V = random_real_function(rng, g, p.band);
            for (auto& x : V) x *= p.scale;
            break;
        }
        case PotentialKind::gaussian: {
            V = periodized_gaussian(g, RVec(static_cast<std::size_t>(g.d), g.L() / 2), p.sigma);
            cplx mean{};
            for (const auto& x : V) mean += x;
            mean /= static_cast<double>(V.size());
            for (auto& x : V) x -= mean;
            const double n = lp_norm(V, g, 2.0);
            for (auto& x : V) x *= p.scale / n;
            break;
        }
        case PotentialKind::cosine: {
            V.assign(g.points(), cplx{});
            std::vector<int> idx(static_cast<std::size_t>(g.d));
            for (std::size_t i = 0; i < V.size(); ++i) {
                unflatten(i, g, idx.data());
                V[i] = p.scale * std::cos(2 * pi * p.band * coord(g, idx[0]) / g.L());
            }
            break;
        }
    }
    if (p.imag != 0.0)
        for (auto& x : V) x *= cplx{1.0, p.imag};
    return V;
}

CMFockVector build_state(const ExperimentConfig& cfg) {
    const GridSpec& g = cfg.grid;
    const int nmax = cfg.solver.nmax;
    CMFockVector u;
    switch (cfg.state) {
        case StateKind::random: {
            Rng rng(split_seed(cfg.seed, kStateStream));
            u = random_cm(rng, g, nmax, safe_band(g, std::max(nmax, 1)));
            break;
        }
        case StateKind::vacuum:
            u = CMFockVector(g, nmax);
            u.slots[0].vacuum = 1.0;
            break;
        case StateKind::pair: {
            if (nmax < 1) throw std::invalid_argument("pair state needs nmax >= 1");
            u = CMFockVector(g, nmax);
            u.slots[0].vacuum = 1.0 / std::sqrt(2.0);
            auto& s1 = u.sector(0, 1);
            std::vector<int> idx(static_cast<std::size_t>(g.d));
            const double amp = 1.0 / std::sqrt(2.0 * std::pow(g.L(), g.d));
            for (std::size_t i = 0; i < s1.size(); ++i) {
                unflatten(i, g, idx.data());
                s1[i] = std::polar(amp, 2 * pi * cfg.state_mode * coord(g, idx[0]) / g.L());
            }
            break;
        }
    }
    if (!cfg.solver.xi.empty()) u.slots[0].xi = cfg.solver.xi.front();
    return u;
}

SuiteResult run_verify_ops_lab(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "verify-ops";
    CsvTable& tab = r.table("ops");
    tab.columns = {"check", "trial", "trial_seed", "residual", "tol", "ratio"};
    const GridSpec& g = cfg.grid;
    const int nmax = std::max(cfg.solver.nmax, 1);
    const std::size_t P = g.points();
    double worst = 0.0;
    auto row = [&](const char* name, int trial, std::uint64_t seed, double res) {
        tab.add({name, trial, seed, res, t.algebra, res / t.algebra});
        worst = std::max(worst, res / t.algebra);
        check(r, res <= t.algebra, seed_tag(seed) + " check=" + name + ": residual " + fmt(res));
    };
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = split_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        Rng rng(seed);
        FockVector u = headroom(random_fock(rng, g, nmax));
        FockVector v = random_fock(rng, g, nmax);
        CVec f = random_function(rng, g), hh = random_function(rng, g), V = random_real_function(rng, g);

        FockVector comm = axpy(-1.0, create(f, annihilate(hh, u)), annihilate(hh, create(f, u)));
        row("ccr", trial, seed, max_diff(comm, scaled(l2_inner(hh, f, g), u)));
        row("adjoint_a", trial, seed, std::abs(inner(create(f, u), v) - inner(u, annihilate(f, v))));
        row("field_symmetric", trial, seed, std::abs(inner(u, field_op(V, headroom(v))) - inner(field_op(V, u), headroom(v))));

        const int n = std::min(nmax, 3);
        const std::size_t size = ipow(P, n);
        std::normal_distribution<double> N01;
        CVec a(size), b(size);
        for (auto& x : a) x = {N01(rng), N01(rng)};
        for (auto& x : b) x = {N01(rng), N01(rng)};
        CVec Sa = symmetrize(a, n, P), Sb = symmetrize(b, n, P), SSa = symmetrize(Sa, n, P);
        double idem = 0.0, scale = 0.0;
        cplx lhs{}, rhs{};
        for (std::size_t i = 0; i < size; ++i) {
            idem = std::max(idem, std::abs(SSa[i] - Sa[i]));
            scale = std::max(scale, std::abs(a[i]));
            lhs += std::conj(Sa[i]) * b[i];
            rhs += std::conj(a[i]) * Sb[i];
        }
        row("symmetrize_projection", trial, seed,
            std::max(idem / scale, std::abs(lhs - rhs) / static_cast<double>(size)));
    }
    r.set("trials", cfg.trials);
    r.set("max_ratio", worst);
    return r;
}

SuiteResult run_verify_ops_cm(const ExperimentConfig& cfg, int trials, const Thresholds& t) {
    SuiteResult r;
    r.name = "verify-ops-cm";
    CsvTable& tab = r.table("ops_cm");
    tab.columns = {"check", "trial", "trial_seed", "residual", "tol", "ratio"};
    const GridSpec& g = cfg.grid;
    const int nmax = std::max(cfg.solver.nmax, 2);
    const int band = safe_band(g, nmax);
    double worst = 0.0;
    auto row = [&](const char* name, int trial, std::uint64_t seed, double res) {
        tab.add({name, trial, seed, res, t.interpolation, res / t.interpolation});
        worst = std::max(worst, res / t.interpolation);
        check(r, res <= t.interpolation, seed_tag(seed) + " check=" + name + ": residual " + fmt(res));
    };
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = split_seed(cfg.seed ^ 0x5ca1ab1eULL, static_cast<std::uint64_t>(trial));
        Rng rng(seed);
        FockVector u = random_fock(rng, g, nmax, band);
        FockVector uh = headroom(random_fock(rng, g, nmax, band));
        FockVector w = random_fock(rng, g, nmax, band);
        CVec V = random_function(rng, g);
        CMFockVector cu = to_cm(u), cuh = to_cm(uh), cw = to_cm(w);

        row("unitarity", trial, seed, std::abs(cm_norm(cu) - fock_norm(u)));
        row("round_trip", trial, seed, max_diff(from_cm(cu), u));
        row("intertwine_a", trial, seed, max_diff(ag_apply(V, cu), to_cm(annihilate(V, u))));
        CMFockVector star = ag_star_apply(V, cuh);
        row("intertwine_a_star", trial, seed, max_diff(star, to_cm(create(V, uh))));
        row("adjoint_a_G", trial, seed, std::abs(cm_inner(star, cw) - cm_inner(cuh, ag_apply(V, cw))));
        CMFockVector rhs = cm_center_derivative(cu, 0);
        row("dgamma_center", trial, seed, max_diff(to_cm(lab_total_derivative(u, 0)), rhs) / max_abs(rhs));
    }
    r.set("trials", trials);
    r.set("max_ratio", worst);
    return r;
}

SuiteResult run_verify_ineq(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "verify-ineq";
    CsvTable& tab = r.table("ineq");
    tab.columns = {"inequality_id", "exponents", "trial_seed", "lhs", "rhs", "ratio"};
    const GridSpec& g = cfg.grid;
    const int nmax = std::max(cfg.solver.nmax, 1);
    const std::vector<LpExponents> tuples = {
        {2, 2, 2, 2}, {1.5, 2, 2, 2}, {1.2, 1.6, 2, 6}, {1, 1.5, 3, kInf}, {1.25, 1.5, 2.5, 4}};
    double worst = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = split_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        Rng rng(seed);
        CVec V = random_function(rng, g);
        CVec phi = random_function(rng, g);
        CMFockVector v = random_cm(rng, g, nmax, safe_band(g, nmax));
        for (const auto& e : tuples) {
            auto add = [&](const std::string& id, double lhs, double rhs) {
                const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
                tab.add({id, e.label(), seed, lhs, rhs, ratio});
                worst = std::max(worst, ratio);
                check(r, ratio <= 1.0 + t.bound, seed_tag(seed) + " " + id + " " + e.label() + ": ratio " + fmt(ratio));
            };
            for (const auto& row : lp_bound_report(V, v, e, 0.0, 1.0)) add(row.id, row.lhs, row.rhs);
            add("young", young_lhs(V, phi, g, e.qp), lp_norm(V, g, e.rp()) * lp_norm(phi, g, e.pp));
        }
    }
    r.set("trials", cfg.trials);
    r.set("tuples", static_cast<double>(tuples.size()));
    r.set("max_ratio", worst);
    return r;
}

SuiteResult run_dispersive(const Thresholds& t) {
    SuiteResult r;
    r.name = "dispersive";
    CsvTable& tab = r.table("dispersive");
    tab.columns = {"case", "d", "t", "t_over_wrap", "ratio"};
    struct Case {
        const char* name;
        GridSpec g;
        double sigma;
    };
    // sigma / L small enough that the no-wrap window reaches t >> sigma^2
    const Case cases[] = {{"line", {1, 2048, 0.25}, 1.0}, {"box3", {3, 128, 0.5}, 0.5}};
    double worst = 0.0;
    for (const auto& c : cases) {
        CVec f = periodized_gaussian(c.g, RVec(static_cast<std::size_t>(c.g.d), c.g.L() / 2), c.sigma);
        const double tw = wrap_time(f, c.g);
        for (double fr : {0.25, 0.5, 1.0}) {
            const double ratio = dispersive_ratio(f, c.g, fr * tw);
            tab.add({c.name, c.g.d, fr * tw, fr, ratio});
            worst = std::max(worst, ratio);
            check(r, ratio <= 1.0 + t.dispersive, std::string(c.name) + " t/Tw=" + fmt(fr) + ": ratio " + fmt(ratio));
        }
        const double slope = decay_slope(f, c.g, {0.7 * tw, 0.8 * tw, 0.9 * tw, tw});
        r.set(std::string("slope_") + c.name, slope);
        r.set(std::string("wrap_time_") + c.name, tw);
        check(r, std::abs(slope + 0.5 * c.g.d) <= t.slope, std::string(c.name) + ": slope " + fmt(slope));
    }
    r.set("max_ratio", worst);
    return r;
}

SuiteResult run_verify_norms(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "verify-norms";
    CsvTable& tab = r.table("norms");
    tab.columns = {"norm_family", "p", "i", "trial", "value", "ratio_to_N1"};
    const double T = 1.5, h = cfg.solver.h;
    const int K = 512;
    double worst_band = 0.0, worst_hom = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = split_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        Rng rng(seed);
        TimeProfile f = random_time_profile(rng, T, h, K);
        RVec s = f.times(), vals(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            vals[k] = f.value(s[k]);
            s[k] *= h / T;
        }
        TimeProfile scaled(s, vals);
        for (int p : {1, 2}) {
            const double kap = kappa_band(p).total();
            const double n1 = n_norm(f, p, 1, T, h);
            for (int i = 1; i <= 4; ++i) {
                const double ni = i == 1 ? n1 : n_norm(f, p, i, T, h);
                const double ratio = ni / n1;
                tab.add({"N", p, i, trial, ni, ratio});
                worst_band = std::max({worst_band, ratio / kap, 1.0 / (ratio * kap)});
                check(r, ratio <= kap && ratio >= 1.0 / kap,
                      seed_tag(seed) + " p=" + std::to_string(p) + " i=" + std::to_string(i) + ": ratio " + fmt(ratio) +
                          " outside kappa band " + fmt(kap));
                const double rhs = T / std::pow(h, 1.0 / p) * n_norm(scaled, p, i, 1.0, 1.0);
                const double dev = std::abs(ni / rhs - 1.0);
                tab.add({"scaled", p, i, trial, rhs, ni / rhs});
                worst_hom = std::max(worst_hom, dev);
                check(r, dev <= t.homogeneity,
                      seed_tag(seed) + " p=" + std::to_string(p) + " i=" + std::to_string(i) + ": scaling residual " + fmt(dev));
            }
        }
    }
    r.set("trials", cfg.trials);
    r.set("max_band_ratio", worst_band);
    r.set("max_scaling_residual", worst_hom);
    return r;
}

SuiteResult run_mc_crosscheck(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "mc-crosscheck";
    CsvTable& tab = r.table("mc");
    tab.columns = {"experiment_id", "x_index", "mc_mean", "mc_stderr", "analytic_value", "z_score"};
    const GridSpec& g = cfg.grid;
    const std::size_t P = g.points();
    const int n = cfg.mc_samples;
    Rng rng(split_seed(cfg.seed, kPotentialStream));
    CVec V = random_real_function(rng, g, std::max(1, g.M / 5));
    FockVector f1(g, 2);
    f1.sector(1) = random_function(rng, g, std::max(1, g.M / 5));
    FockVector u2 = random_fock(rng, g, 2, std::max(1, g.M / 5));
    FockVector gv = random_fock(rng, g, 2, std::max(1, g.M / 5));
    double worst = 0.0;
    std::uint64_t stream = 0;
    auto add = [&](const std::string& id, std::size_t x, const McResult& m, double expect) {
        const double z = m.stderr_ > 0.0 ? (m.mean - expect) / m.stderr_ : (m.mean == expect ? 0.0 : kInf);
        tab.add({id, x, m.mean, m.stderr_, expect, z});
        worst = std::max(worst, std::abs(z));
        check(r, std::abs(z) <= t.z, id + " x=" + std::to_string(x) + ": z " + fmt(z));
    };
    auto next_seed = [&] { return split_seed(cfg.seed, (1u << 21) + stream++); };
    auto field_at = [&](std::uint64_t s, std::size_t x) { return potential_field(V, sample_white_noise(s, g)).values[x]; };

    const std::size_t x0 = 0, x1 = std::min<std::size_t>(P - 1, 3);
    add("mean", x1, mc_expect([&](std::uint64_t s) { return field_at(s, x1); }, n, next_seed()), 0.0);
    for (std::size_t xp : {x0, x1}) {
        double cov = 0.0;
        for (std::size_t y = 0; y < P; ++y) cov += V[(y + P - x0) % P].real() * V[(y + P - xp) % P].real();
        cov *= g.cell();
        add(xp == x0 ? "variance" : "covariance", xp,
            mc_expect(
                [&](std::uint64_t s) {
                    auto pf = potential_field(V, sample_white_noise(s, g));
                    return pf.values[x0] * pf.values[xp];
                },
                n, next_seed()),
            cov);
    }
    add("isometry_order1", x1,
        mc_expect([&](std::uint64_t s) { return std::norm(chaos_eval(f1, sample_white_noise(s, g), x1)); }, n, next_seed()),
        std::pow(fock_norm(f1), 2));
    add("isometry_order2", x0,
        mc_expect([&](std::uint64_t s) { return std::norm(chaos_eval(u2, sample_white_noise(s, g), x0)); }, n, next_seed()),
        std::pow(fock_norm(u2), 2));
    // E[conj(G) V(0) F] = <g, (a(V) + a*(V)) f>
    FockVector af = axpy(1.0, annihilate(V, f1), create(V, f1));
    const cplx expect = inner(gv, af);
    auto pairing = mc_expect_complex(
        [&](std::uint64_t s) {
            auto noise = sample_white_noise(s, g);
            return std::conj(chaos_eval(gv, noise, x0)) * potential_field(V, noise).values[x0] * chaos_eval(f1, noise, x0);
        },
        n, next_seed());
    add("pairing_re", x0, pairing.re, expect.real());
    add("pairing_im", x0, pairing.im, expect.imag());
    r.set("samples", n);
    r.set("max_abs_z", worst);
    return r;
}

SuiteResult run_solve(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "solve";
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    const auto P = PotentialPair::same(V);
    SolverConfig s = prepared_solver(cfg, V);
    const std::string tag = "h=" + hkey(s.h);
    try {
        if (cfg.calibrate) s.gamma = calibrate_gamma(u0, P, s, cfg.solver.gamma);
        SolverConfig half = s;
        half.gamma /= 2;
        const double r1 = contraction_ratio(u0, P, s), r2 = contraction_ratio(u0, P, half);
        const double q = r2 / r1;
        r.set("h", s.h);
        r.set("gamma", s.gamma);
        r.set("steps", s.steps());
        r.set("contraction", r1);
        r.set("contraction_half", r2);
        r.set("halving_ratio", q);
        check(r, r1 <= t.contraction, tag + ": contraction ratio " + fmt(r1));
        check(r, std::abs(q / std::sqrt(0.5) - 1.0) <= t.sqrt_gamma, tag + ": gamma-halving ratio " + fmt(q));

        auto pr = picard_solve(u0, P, s);
        const StateSeq uG = reconstruct(pr.sol.inf, u0, pr.sol.times);
        const auto ref = reference_integrate(u0, P, s, cfg.oracle_substeps);
        const RVec id = identity_split_check(pr.sol, uG, P, s);
        CsvTable& traj = r.table("trajectory_h" + hkey(s.h));
        traj.columns = {"t", "norm_uG", "weighted_alpha0", "weighted_0", "weighted_half_alpha1", "weighted_alpha1",
                        "oracle_rel_err", "identity_residual"};
        double oracle = 0.0;
        for (std::size_t m = 0; m < uG.size(); ++m) {
            const double err = cm_norm(cm_axpy(-1.0, ref.states[m], uG[m])) / cm_norm(ref.states[m]);
            oracle = std::max(oracle, err);
            traj.add({pr.sol.times[m], cm_norm(uG[m]), cm_norm(cm_number_weight(s.alpha0, uG[m])), cm_norm(uG[m]),
                      cm_norm(cm_number_weight(0.5 * s.alpha1, uG[m])), cm_norm(cm_number_weight(s.alpha1, uG[m])), err,
                      id[m]});
        }
        CsvTable& diag = r.table("diagnostics_h" + hkey(s.h));
        diag.columns = {"iterate", "m_increment", "ratio"};
        for (std::size_t k = 0; k < pr.diag.increments.size(); ++k)
            diag.add({static_cast<int>(k + 1), pr.diag.increments[k], k == 0 ? std::nan("") : pr.diag.ratios[k - 1]});
        r.set("iterations", pr.diag.iterations);
        r.set("oracle_max_rel_err", oracle);
        r.set("identity_max", sup(id));
        r.set("picard_tol", s.tol);
        r.set("leakage", ref.leakage.empty() ? 0.0 : ref.leakage.back());
        check(r, pr.diag.converged, tag + ": Picard iteration did not converge");
        check(r, oracle <= t.oracle, tag + ": oracle relative error " + fmt(oracle));
        check(r, sup(id) <= t.identity_factor * s.tol, tag + ": identity residual " + fmt(sup(id)));
    } catch (const ContractionError& e) {
        r.failures.push_back(tag + ": " + e.what());
    }
    return r;
}

SuiteResult run_weight_propagation(const ExperimentConfig& cfg, const Thresholds& t) {
    SuiteResult r;
    r.name = "weights";
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    const auto P = PotentialPair::same(V);
    SolverConfig s = prepared_solver(cfg, V);
    CsvTable& tab = r.table("weights");
    tab.columns = {"dt", "steps", "sup_weighted_alpha1", "sup_norm"};
    try {
        if (cfg.calibrate) s.gamma = calibrate_gamma(u0, P, s, cfg.solver.gamma);
        RVec sups;
        for (int level = 0; level < 2; ++level) {
            SolverConfig c = s;
            if (level == 1) {
                c.dt = s.step() / 2;
                c.min_steps = 2 * s.steps();
            }
            auto pr = picard_solve(u0, P, c);
            const StateSeq uG = reconstruct(pr.sol.inf, u0, pr.sol.times);
            double w = 0.0, n = 0.0;
            for (const auto& x : uG) {
                w = std::max(w, cm_norm(cm_number_weight(c.alpha1, x)));
                n = std::max(n, cm_norm(x));
            }
            tab.add({c.step(), c.steps(), w, n});
            sups.push_back(w);
        }
        const double rel = std::abs(sups[1] / sups[0] - 1.0);
        r.set("gamma", s.gamma);
        r.set("sup_weighted", sups[0]);
        r.set("sup_weighted_half_dt", sups[1]);
        r.set("relative_change", rel);
        check(r, std::isfinite(sups[0]) && std::isfinite(sups[1]), "weighted norm not finite");
        check(r, rel <= t.dt_stability, "dt halving changes the weighted sup by " + fmt(rel));
    } catch (const ContractionError& e) {
        r.failures.push_back(e.what());
    }
    return r;
}

SuiteResult run_truncate_sweep(const ExperimentConfig& cfg, const RVec& eps, const Thresholds& t) {
    SuiteResult r;
    r.name = "truncate-sweep";
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    SolverConfig s = prepared_solver(cfg, V);
    CsvTable& tab = r.table("truncation");
    tab.columns = {"eps", "sup_gap", "steps"};
    RVec gaps;
    for (double e : eps) {
        SolverConfig c = s;
        c.eps = e;
        gaps.push_back(sup(truncation_gap(u0, V, c, cfg.oracle_substeps)));
        tab.add({e, gaps.back(), c.steps()});
    }
    if (eps.size() >= 2) {
        const double slope = loglog_slope(eps, gaps);
        r.set("slope", slope);
        check(r, std::abs(slope - 1.0) <= t.eps_slope, "eps slope " + fmt(slope));
    } else {
        r.failures.push_back("need at least two eps values");
    }
    return r;
}

SuiteResult run_expansion(const ExperimentConfig& cfg, const RVec& deltas, const Thresholds& t) {
    SuiteResult r;
    r.name = "expansion";
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    SolverConfig s = prepared_solver(cfg, V);
    auto res = expansion_check(u0, PotentialPair::same(V), s, deltas, cfg.expansion_steps, cfg.expansion_terms);
    CsvTable& tab = r.table("expansion");
    tab.columns = {"delta", "R0", "R1", "R2"};
    for (std::size_t j = 0; j < res.deltas.size(); ++j)
        tab.add({res.deltas[j], res.remainders[0][j], res.remainders[1][j], res.remainders[2][j]});
    for (int k = 0; k < 3; ++k) {
        const double slope = res.slopes[static_cast<std::size_t>(k)];
        r.set("slope_" + std::to_string(k), slope);
        check(r, std::abs(slope - 0.5 * (k + 1)) <= t.order_slope, "order " + std::to_string(k) + " slope " + fmt(slope));
    }
    r.set("series_tail", res.series_tail);
    return r;
}

SuiteResult run_perturb(const ExperimentConfig& cfg, double amplitude, const Thresholds& t) {
    SuiteResult r;
    r.name = "perturb";
    const GridSpec& g = cfg.grid;
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    const auto ref = PotentialPair::same(V);
    SolverConfig s = prepared_solver(cfg, V);
    Rng rng(split_seed(cfg.seed, kPotentialStream + 2));
    const CVec dV = random_function(rng, g, cfg.potential.band);  // complex direction
    CsvTable& tab = r.table("perturb");
    tab.columns = {"amplitude", "dV_norm", "sup_diff"};
    try {
        if (cfg.calibrate) s.gamma = calibrate_gamma(u0, ref, s, cfg.solver.gamma);
        RVec sups;
        for (double a : {amplitude, amplitude / 2, amplitude / 4}) {
            PotentialPair other = ref;
            for (std::size_t i = 0; i < dV.size(); ++i) {
                other.V1[i] += a * dV[i];
                other.V2[i] += a * dV[i];
            }
            auto p = perturb_potential(u0, ref, other, s);
            tab.add({a, p.dV, p.sup});
            sups.push_back(p.sup);
        }
        r.set("gamma", s.gamma);
        for (int k = 0; k < 2; ++k) {
            const double q = sups[static_cast<std::size_t>(k)] / sups[static_cast<std::size_t>(k + 1)];
            r.set("halving_ratio_" + std::to_string(k), q);
            check(r, std::abs(q / 2.0 - 1.0) <= t.halving, "halving ratio " + fmt(q));
        }
    } catch (const ContractionError& e) {
        r.failures.push_back(e.what());
    }
    return r;
}

SuiteResult run_husimi(const ExperimentConfig& cfg, const RVec& hs, const Thresholds& t, HusimiField* field) {
    SuiteResult r;
    r.name = "husimi";
    const GridSpec& g = cfg.grid;
    const double h = cfg.sc_h;
    const int c = cfg.coarsen;
    CsvTable& ps = r.table("phase_space");
    ps.columns = {"check", "case", "value", "tol"};
    auto lattice = [&](int m) { return 2.0 * pi * m / g.L(); };
    RVec x0(static_cast<std::size_t>(g.d), h * g.L() / 4), xi0(static_cast<std::size_t>(g.d), 0.0);
    xi0[0] = lattice(2);

    // positivity and mass for a coherent packet and a band-limited wave
    double min_val = kInf, mass_dev = 0.0;
    auto phi = coherent_state(h, {x0, xi0}, g);
    Rng rng(split_seed(cfg.seed, kStateStream + 7));
    CVec wave = random_function(rng, g, std::max(1, g.M / 8));
    for (const auto& [name, psi] : {std::pair<const char*, const CVec*>{"coherent", &phi.values}, {"band_limited", &wave}}) {
        auto H = husimi({*psi}, {1.0}, g, h, c);
        const double mn = *std::min_element(H.values.begin(), H.values.end());
        const double dev = std::abs(H.mass() - 1.0);
        ps.add({"min_value", name, mn, 0.0});
        ps.add({"mass_deviation", name, dev, t.husimi_mass});
        min_val = std::min(min_val, mn);
        mass_dev = std::max(mass_dev, dev);
    }

    // Weyl / Wigner duality, d = 1
    double duality = 0.0;
    if (g.d == 1) {
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            CVec u = random_function(rng, g, g.M / 4), v = random_function(rng, g, g.M / 4);
            RVec co(6);
            for (auto& x : co) x = U(rng);
            const double Lh = h * g.L();
            auto sym = [&](double x, double xi) {
                return cplx{co[0] + co[1] * std::cos(2 * pi * x / Lh) + co[3] * std::cos(xi) + co[5] * xi * xi / 4.0,
                            co[2] * std::sin(4 * pi * x / Lh) + co[4] * std::sin(2 * xi) * std::cos(2 * pi * x / Lh)};
            };
            CVec a = sample_symbol(sym, g, h);
            const double dev = std::abs(l2_inner(v, weyl_apply(a, u, g), g) - wigner_pairing(a, wigner_pair(v, u, g), g));
            ps.add({"duality", "trial_" + std::to_string(trial), dev, t.duality});
            duality = std::max(duality, dev);
        }
        check(r, duality <= t.duality, "Weyl/Wigner duality residual " + fmt(duality));
    }

    // free transport moves the Husimi peak by 2 xi0 t
    double recentre = 0.0;
    for (double tm : {0.1, 0.2, 0.3}) {
        CVec psi = evolve_free(phi.values, g, tm / h);
        auto H = husimi({psi}, {1.0}, g, h, c);
        const PhasePoint top = H.argmax();
        const double Lh = h * g.L();
        double dx = std::fmod(top.x[0] - (x0[0] + 2.0 * xi0[0] * tm), Lh);
        if (dx > Lh / 2) dx -= Lh;
        if (dx < -Lh / 2) dx += Lh;
        const double cells = std::max(std::abs(dx) / (h * c * g.delta), std::abs(top.xi[0] - xi0[0]) / lattice(1));
        ps.add({"recentre_cells", "t=" + fmt(tm), cells, 1.0});
        recentre = std::max(recentre, cells);
    }
    check(r, recentre <= 1.0, "free-transport peak off by " + fmt(recentre) + " phase cells");

    // band-mass growth under the truncated dynamics
    CsvTable& bm = r.table("band_mass");
    bm.columns = {"h", "outside_initial", "growth", "steps"};
    const CVec V = build_potential(cfg);
    const CMFockVector u0 = build_state(cfg);
    RVec growth;
    for (std::size_t j = 0; j < hs.size(); ++j) {
        SolverConfig s = prepared_solver(cfg, V);
        s.h = hs[j];
        s.gamma = cfg.sc_T / (s.alpha1 - s.alpha0);
        if (s.eps <= 0.0) s.eps = 0.1;
        auto res = truncated_dynamics(u0, V, s);
        const double o0 = energy_band_mass(res.states.front(), cfg.band).outside;
        double gmax = 0.0;
        for (const auto& st : res.states) gmax = std::max(gmax, std::abs(energy_band_mass(st, cfg.band).outside - o0));
        growth.push_back(gmax);
        bm.add({hs[j], o0, gmax, s.steps()});
        if (j == 0) {
            const CMFockVector& last = res.states.back();
            try {
                HusimiField H = husimi(last, h, c);
                const double trace = std::pow(cm_norm(last), 2);
                const double mn = *std::min_element(H.values.begin(), H.values.end());
                const double dev = std::abs(H.mass() - trace) / trace;
                ps.add({"min_value", "evolved_state", mn, 0.0});
                ps.add({"mass_deviation", "evolved_state", dev, t.husimi_mass});
                r.set("escaped_mass", trace - H.mass());
                min_val = std::min(min_val, mn);
                mass_dev = std::max(mass_dev, dev);
                if (field) *field = std::move(H);
            } catch (const std::invalid_argument& e) {
                r.failures.push_back(std::string("partial-trace Husimi: ") + e.what());
            }
        }
    }
    check(r, min_val >= 0.0, "negative Husimi value " + fmt(min_val));
    check(r, mass_dev <= t.husimi_mass, "Husimi mass deviation " + fmt(mass_dev));
    r.set("min_value", min_val);
    r.set("mass_deviation", mass_dev);
    r.set("duality", duality);
    r.set("recentre_cells", recentre);
    if (hs.size() >= 2) {
        const double slope = loglog_slope(hs, growth);
        r.set("band_slope", slope);
        check(r, std::abs(slope - 0.5) <= t.band_slope, "band-mass slope " + fmt(slope));
    }
    return r;
}

}  // namespace fockcm
