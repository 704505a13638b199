// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select criteria by number.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "fockcm/experiments.hpp"
#include "fockcm/generators.hpp"
#include "fockcm/random_field.hpp"

using namespace fockcm;

namespace {

// Pinned tolerances.
constexpr double kAlgebraTol = 1e-10;
constexpr double kInterpTol = 1e-7;
constexpr double kBoundSlack = 1e-6;
constexpr double kDispersiveSlack = 1e-3;
constexpr double kDecaySlope = 0.05;
constexpr double kScalingTol = 1e-10;
constexpr double kContraction = 0.5;
constexpr double kSqrtGammaBand = 0.2;
constexpr double kOracleTol = 1e-4;
constexpr double kIdentityFactor = 10.0;
constexpr double kDtStability = 0.1;
constexpr double kOrderSlope = 0.15;
constexpr double kEpsSlope = 0.2;
constexpr double kHalving = 0.2;
constexpr double kZ = 5.0;
constexpr double kHusimiMass = 0.01;
constexpr double kDuality = 1e-8;
constexpr double kBandSlope = 0.2;

Thresholds pinned() {
    Thresholds t;
    t.algebra = kAlgebraTol;
    t.interpolation = kInterpTol;
    t.bound = kBoundSlack;
    t.dispersive = kDispersiveSlack;
    t.slope = kDecaySlope;
    t.homogeneity = kScalingTol;
    t.z = kZ;
    t.contraction = kContraction;
    t.sqrt_gamma = kSqrtGammaBand;
    t.oracle = kOracleTol;
    t.identity_factor = kIdentityFactor;
    t.dt_stability = kDtStability;
    t.order_slope = kOrderSlope;
    t.eps_slope = kEpsSlope;
    t.halving = kHalving;
    t.husimi_mass = kHusimiMass;
    t.duality = kDuality;
    t.band_slope = kBandSlope;
    return t;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string first_failures(const SuiteResult& r, std::size_t k = 2) {
    std::string s;
    for (std::size_t i = 0; i < r.failures.size() && i < k; ++i) s += " | " + r.failures[i];
    if (r.failures.size() > k) s += " | (+" + std::to_string(r.failures.size() - k) + " more)";
    return s;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double max_col(const CsvTable& t, const std::string& col, const std::string& check_prefix = "") {
    double m = 0.0;
    const std::size_t c = t.col(col), k = t.col("check");
    for (const auto& row : t.rows)
        if (check_prefix.empty() || row[k].rfind(check_prefix, 0) == 0) m = std::max(m, std::stod(row[c]));
    return m;
}

ExperimentConfig base(GridSpec g, int nmax) {
    ExperimentConfig c;
    c.seed = 20240611;
    c.grid = g;
    c.solver.nmax = nmax;
    return c;
}

// <a_G^*(V) x, y> = <x, a_G(V) y> on band-limited symmetric states, top sector of x left empty.
double a_g_adjointness(const GridSpec& g, int nmax, int trials, std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(trial)));
        FockVector u = random_fock(rng, g, nmax, safe_band(g, nmax));
        std::fill(u.sectors.back().begin(), u.sectors.back().end(), cplx{});
        FockVector w = random_fock(rng, g, nmax, safe_band(g, nmax));
        CVec V = random_function(rng, g);
        CMFockVector cu = to_cm(u), cw = to_cm(w);
        worst = std::max(worst, std::abs(cm_inner(ag_star_apply(V, cu), cw) - cm_inner(cu, ag_apply(V, cw))));
    }
    return worst;
}

Outcome c1() {
    ExperimentConfig c = base({1, 64, 0.5}, 3);
    c.trials = 100;
    const auto lab = run_verify_ops_lab(c, pinned());
    const double adj = a_g_adjointness(c.grid, 3, 8, c.seed);
    const bool ok = lab.ok() && adj <= kInterpTol;
    return {ok, "100 trials, max residual/tol " + num(lab.metric("max_ratio")) + ", a_G adjointness " + num(adj) +
                    " over 8 trials" + first_failures(lab)};
}

Outcome c2() {
    const auto cm = run_verify_ops_cm(base({1, 64, 0.5}, 3), 12, pinned());
    const auto& t = cm.table("ops_cm");
    std::string d = "12 trials: unitarity " + num(max_col(t, "residual", "unitarity")) + ", intertwining " +
                    num(std::max(max_col(t, "residual", "intertwine_a"), max_col(t, "residual", "intertwine_a_star"))) +
                    ", dGamma " + num(max_col(t, "residual", "dgamma"));
    return {cm.ok(), d + first_failures(cm)};
}

Outcome c3() {
    ExperimentConfig c = base({1, 16, 0.5}, 3);
    c.trials = 100;
    const auto r = run_verify_ineq(c, pinned());
    return {r.ok(), "100 trials x " + num(r.metric("tuples")) + " tuples, " + std::to_string(r.table("ineq").size()) +
                        " ratios, max " + num(r.metric("max_ratio")) + first_failures(r)};
}

Outcome c4() {
    const auto r = run_dispersive(pinned());
    return {r.ok(), "max ratio " + num(r.metric("max_ratio")) + ", slope d=1 " + num(r.metric("slope_line")) +
                        ", slope d=3 " + num(r.metric("slope_box3")) + first_failures(r)};
}

Outcome c5() {
    ExperimentConfig c = base({1, 32, 1.0}, 2);
    c.trials = 200;
    c.solver.h = 0.2;
    const auto r = run_verify_norms(c, pinned());
    return {r.ok(), "200 trajectories, worst ratio/kappa " + num(r.metric("max_band_ratio")) + ", scaling residual " +
                        num(r.metric("max_scaling_residual")) + first_failures(r)};
}

ExperimentConfig picard_config(double h) {
    ExperimentConfig c = base({1, 32, 1.0}, 2);
    c.potential = {PotentialKind::random, 4, 0.5, 1.0, 0.0};
    c.solver.h = h;
    c.solver.gamma = 1.0;
    c.solver.dt = 0.025;
    c.solver.tol = 1e-10;
    c.oracle_substeps = 4;
    return c;
}

Outcome c6() {
    bool ok = true;
    std::string d;
    for (double h : {0.1, 0.05}) {
        const auto r = run_solve(picard_config(h), pinned());
        ok = ok && r.ok();
        d += (d.empty() ? "" : "; ") + std::string("h=") + num(h);
        if (r.metrics.size() > 6)
            d += ": gamma " + num(r.metric("gamma")) + " ratio " + num(r.metric("contraction")) + " halving " +
                 num(r.metric("halving_ratio")) + " oracle " + num(r.metric("oracle_max_rel_err")) + " identity " +
                 num(r.metric("identity_max"));
        d += first_failures(r);
    }
    return {ok, d};
}

Outcome c7() {
    const auto r = run_weight_propagation(picard_config(0.1), pinned());
    if (!r.ok() && r.metrics.empty()) return {false, first_failures(r)};
    return {r.ok(), "sup ||e^{a1 N} u_G|| " + num(r.metric("sup_weighted")) + " vs " + num(r.metric("sup_weighted_half_dt")) +
                        " at half step, change " + num(r.metric("relative_change")) + first_failures(r)};
}

Outcome c8() {
    ExperimentConfig c = base({1, 256, 0.25}, 2);
    c.state = StateKind::vacuum;
    c.solver.xi = {{1.0}};
    c.potential = {PotentialKind::gaussian, 0, 0.5, 0.3, 0.0};
    c.solver.h = 0.01;
    c.expansion_steps = 256;
    c.expansion_terms = 10;
    RVec deltas;
    for (int j = 0; j <= 8; ++j) deltas.push_back(0.016 * std::pow(10.0, j / 8.0));
    const auto r = run_expansion(c, deltas, pinned());
    return {r.ok(), "delta in [0.016, 0.16], slopes " + num(r.metric("slope_0")) + " / " + num(r.metric("slope_1")) + " / " +
                        num(r.metric("slope_2")) + ", series tail " + num(r.metric("series_tail")) + first_failures(r)};
}

Outcome c9() {
    ExperimentConfig c = picard_config(0.1);
    c.solver.gamma = 0.25;
    c.solver.chi = ChiKind::exponential;
    const auto r = run_truncate_sweep(c, {0.2, 0.1, 0.05, 0.025}, pinned());
    std::string d = "eps 0.2..0.025, sup gaps";
    for (double g : r.table("truncation").numbers("sup_gap")) d += " " + num(g);
    if (r.metrics.size()) d += ", slope " + num(r.metric("slope"));
    return {r.ok(), d + first_failures(r)};
}

Outcome c10() {
    ExperimentConfig c = picard_config(0.1);
    c.potential.imag = 0.5;
    const auto r = run_perturb(c, 0.02, pinned());
    if (r.metrics.size() < 3) return {false, first_failures(r)};
    return {r.ok(), "complex V, ratios " + num(r.metric("halving_ratio_0")) + " " + num(r.metric("halving_ratio_1")) +
                        first_failures(r)};
}

Outcome c11() {
    ExperimentConfig c = base({1, 16, 0.5}, 2);
    c.mc_samples = 10000;
    const auto r = run_mc_crosscheck(c, pinned());
    return {r.ok(), "10^4 samples, max |z| " + num(r.metric("max_abs_z")) + first_failures(r)};
}

Outcome c12() {
    ExperimentConfig c = base({1, 32, 1.0}, 2);
    const double xi = 2 * std::numbers::pi * 5 / 32.0;
    c.state = StateKind::pair;
    c.state_mode = 2;
    c.solver.xi = {{xi}};
    c.potential = {PotentialKind::cosine, 2, 0.5, 0.05, 0.0};
    c.solver.eps = 0.1;
    c.solver.chi = ChiKind::exponential;
    c.solver.dt = 0.04;
    c.sc_T = 1.0;
    c.sc_h = 0.1;
    c.band = {{{xi * xi - 0.2, xi * xi + 0.2}}, 0.2, false};
    const auto r = run_husimi(c, {0.1, 0.05, 0.02, 0.01}, pinned());
    return {r.ok(), "min " + num(r.metric("min_value")) + ", mass dev " + num(r.metric("mass_deviation")) + ", duality " +
                        num(r.metric("duality")) + ", recentre cells " + num(r.metric("recentre_cells")) +
                        ", band slope " + (r.metrics.size() > 5 ? num(r.metric("band_slope")) : "n/a") + first_failures(r)};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "operator algebra", 60, c1},
        {2, "U_G unitarity and intertwining", 60, c2},
        {3, "inequality suite", 120, c3},
        {4, "dispersive decay", 120, c4},
        {5, "norm equivalences", 120, c5},
        {6, "fixed point", 600, c6},
        {7, "number-weight propagation", 300, c7},
        {8, "short-time expansion orders", 600, c8},
        {9, "eps-truncation stability", 600, c9},
        {10, "potential perturbation", 300, c10},
        {11, "Monte Carlo / chaos cross-check", 300, c11},
        {12, "semiclassics", 600, c12},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::stoi(argv[i]));
    int failed = 0;
    for (const auto& c : all) {
        if (!pick.empty() && !pick.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("%s  criterion %2d  %-32s %s (%.1f s of %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
