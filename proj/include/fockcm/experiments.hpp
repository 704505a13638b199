#pragma once

#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "fockcm/config.hpp"
#include "fockcm/io.hpp"

namespace fockcm {

/// Outcome of one suite: artifact tables, named scalar metrics and the violating cases.
struct SuiteResult {
    std::string name;
    std::deque<std::pair<std::string, CsvTable>> tables;  // artifact stem -> rows, references stay valid
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> failures;  // "seed=<s> <inputs>: <what>"

    bool ok() const { return failures.empty(); }
    /// Throws std::out_of_range for an unknown name.
    double metric(const std::string& key) const;
    void set(const std::string& key, double v) { metrics.emplace_back(key, v); }
    CsvTable& table(const std::string& stem);
    const CsvTable& table(const std::string& stem) const;
};

/// Streams of cfg.seed reserved for the potential and the initial state; trials use split_seed(seed, trial).
inline constexpr std::uint64_t kPotentialStream = 1u << 20;
inline constexpr std::uint64_t kStateStream = (1u << 20) + 1;

/// random: band-limited real profile of L^2 norm `scale`; gaussian: mean-free periodized Gaussian of
/// L^2 norm `scale`; cosine: scale cos(2 pi band y / L). Multiplied by (1 + i imag).
CVec build_potential(const ExperimentConfig& cfg);
/// random: random_cm with the safe band; vacuum: unit vacuum; pair: (vacuum + plane wave of mode
/// state_mode) / sqrt 2. Slot offsets from solver.xi.
CMFockVector build_state(const ExperimentConfig& cfg);

/// Residual thresholds used to fill SuiteResult::failures.
struct Thresholds {
    double algebra = 1e-10;        // exact lab-frame identities
    double interpolation = 1e-7;   // identities through the center-of-mass map
    double bound = 1e-6;           // ratio slack for inequalities
    double dispersive = 1e-3;
    double slope = 0.05;           // dispersive slope
    double homogeneity = 1e-10;
    double z = 5.0;                // Monte Carlo standard errors
    double contraction = 0.5;
    double sqrt_gamma = 0.2;       // relative band on the gamma-halving ratio
    double oracle = 1e-4;
    double identity_factor = 10.0; // times the Picard tolerance
    double dt_stability = 0.1;
    double order_slope = 0.15;
    double eps_slope = 0.2;
    double halving = 0.2;
    double husimi_mass = 0.01;
    double duality = 1e-8;
    double band_slope = 0.2;
};

/// CCR, adjointness, field-operator symmetry and symmetrization (table "ops").
SuiteResult run_verify_ops_lab(const ExperimentConfig& cfg, const Thresholds& t = {});
/// Unitarity, round trip, intertwining of a/a* and dGamma(D) through the center-of-mass map (table "ops_cm").
SuiteResult run_verify_ops_cm(const ExperimentConfig& cfg, int trials, const Thresholds& t = {});
/// L^p bound reports and the Young-type bound (table "ineq").
SuiteResult run_verify_ineq(const ExperimentConfig& cfg, const Thresholds& t = {});
/// Dispersive ratio and decay slope on a wide d = 1 line and a coarse d = 3 box (table "dispersive").
SuiteResult run_dispersive(const Thresholds& t = {});
/// N_{p,i} / N_{p,1} inside the kappa bands and the scaling identity (table "norms").
SuiteResult run_verify_norms(const ExperimentConfig& cfg, const Thresholds& t = {});
/// Covariance, chaos isometry and pairing against the field operator (table "mc").
SuiteResult run_mc_crosscheck(const ExperimentConfig& cfg, const Thresholds& t = {});
/// Picard solve at solver.h: contraction, gamma-halving, oracle and identity checks
/// (tables "trajectory_h<h>", "diagnostics_h<h>").
SuiteResult run_solve(const ExperimentConfig& cfg, const Thresholds& t = {});
/// sup_t ||e^{alpha1 N} u_G(t)|| at the step and at half the step (table "weights").
SuiteResult run_weight_propagation(const ExperimentConfig& cfg, const Thresholds& t = {});
/// sup_t ||u - v_eps|| over eps and its log-log slope (table "truncation").
SuiteResult run_truncate_sweep(const ExperimentConfig& cfg, const RVec& eps, const Thresholds& t = {});
/// Remainders of the free / single / double Duhamel sums (table "expansion").
SuiteResult run_expansion(const ExperimentConfig& cfg, const RVec& deltas, const Thresholds& t = {});
/// sup_t ||u_inf' - u_inf|| for dV, dV/2, dV/4 along a complex direction (table "perturb").
SuiteResult run_perturb(const ExperimentConfig& cfg, double amplitude, const Thresholds& t = {});
/// Husimi positivity and mass, Weyl/Wigner duality, free recentering (table "phase_space") and
/// band-mass growth over h (table "band_mass"). `field` receives the Husimi field of the final state
/// at the first h when non-null.
SuiteResult run_husimi(const ExperimentConfig& cfg, const RVec& hs, const Thresholds& t = {},
                       HusimiField* field = nullptr);

}  // namespace fockcm
