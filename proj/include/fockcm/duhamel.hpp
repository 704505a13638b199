#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "fockcm/mixed_norms.hpp"

namespace fockcm {

enum class ChiKind { hard, exponential };

/// chi_eps(n): 1_{[0,1/eps]}(n) or e^{-eps n}; identically 1 for eps = 0.
double chi_value(ChiKind kind, double eps, int n);

struct SolverConfig {
    double h = 0.1;
    double gamma = 0.5;
    double alpha0 = -1.0;
    double alpha1 = 1.0;
    double C_V = 1.0;
    double dt = 0.05;          // requested step, shrunk so the window holds an integer count
    int min_steps = 64;        // floor on the node count of the window
    double tol = 1e-8;         // absolute M-increment tolerance
    int max_iter = 60;
    int nmax = 2;
    double eps = 0.0;          // number truncation, 0 = off
    ChiKind chi = ChiKind::exponential;
    std::vector<RVec> xi;      // parameter slots used when the CLI builds u0
    SupGrid sup;

    WeightParams weights() const { return WeightParams{h, gamma, alpha0, alpha1, C_V}; }
    /// Microscopic end time T_{alpha0} / h.
    double window() const { return gamma * (alpha1 - alpha0) / h; }
    int steps() const;
    double step() const { return window() / steps(); }
    RVec times() const;
    /// Throws std::invalid_argument on a violated invariant, including a step resolving the
    /// fastest free phase on g with fewer than 8 samples per period.
    void validate(const GridSpec& g) const;
};

/// V1 enters through a_G^*, V2 through a_G. The plain system has V1 = V2 = V.
struct PotentialPair {
    CVec V1;
    CVec V2;
    static PotentialPair same(const CVec& V) { return {V, V}; }
};

/// C_V = 1 + ||V||_{r'} with r' = 2d/(d+2) for d >= 3 and r' = 1 below.
double potential_bound(const CVec& V, const GridSpec& g);

using StateSeq = std::vector<CMFockVector>;

struct SystemTrajectory {
    RVec times;
    StateSeq inf;
    StateSeq two;
    StateSeq one;
};

/// Composite trapezoid values I_m = int_0^{t_m} U(t_m - s) phi(s) ds on a uniform grid.
StateSeq duhamel_integral(const StateSeq& phi, double dt);

/// U(t_m) u0 on every node.
StateSeq free_trajectory(const CMFockVector& u0, const RVec& times);

/// (f_inf, f_2) on the solver grid; f_1 is zero.
std::pair<StateSeq, StateSeq> rhs_build(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg);

SystemTrajectory apply_L(const SystemTrajectory& u, const PotentialPair& V, const SolverConfig& cfg);

/// M = M_inf + M_2 + M_1 with the configured weights and sup grids.
double system_M(const SystemTrajectory& u, const SolverConfig& cfg);

struct PicardDiagnostics {
    RVec increments;  // M(u^{(k)} - u^{(k-1)}), k = 1, 2, ...
    RVec ratios;      // increments[k] / increments[k-1]
    int iterations = 0;
    bool converged = false;
    double rho = 0.0;          // largest increment ratio
    double contraction = 0.0;  // empirical contraction ratio from probe_contraction
};

class ContractionError : public std::runtime_error {
public:
    ContractionError(const std::string& what, PicardDiagnostics d) : std::runtime_error(what), diag(std::move(d)) {}
    PicardDiagnostics diag;
};

struct PicardResult {
    SystemTrajectory sol;
    PicardDiagnostics diag;
};

/// Iterates u <- L u + f from u = 0. Throws ContractionError when the probe ratio is >= 0.9 or after
/// three consecutive increment ratios >= 1.
PicardResult picard_solve(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg);

/// u_G(t) = u_inf(t) + U(t) u0.
StateSeq reconstruct(const StateSeq& u_inf, const CMFockVector& u0, const RVec& times);

/// sqrt(h) [chi a_G^*(V1) chi + chi a_G(V2) chi] v with chi = chi_eps(N).
CMFockVector interaction_apply(const CMFockVector& v, const PotentialPair& V, double h, double eps, ChiKind chi);

struct ReferenceResult {
    RVec times;
    StateSeq states;
    RVec leakage;  // integrated norm flowing past sector nmax, per node
};

/// Strang splitting between the free multiplier and the truncated interaction, `substeps`
/// steps per solver node; the interaction exponential is a Taylor series.
ReferenceResult reference_integrate(const CMFockVector& u0, const PotentialPair& V, const SolverConfig& cfg,
                                    int substeps = 1);

/// ||sqrt(h) a_G(V2) u_G(t) - u_1(t) - sqrt(h) u_2(t)|| per node.
RVec identity_split_check(const SystemTrajectory& u, const StateSeq& uG, const PotentialPair& V, const SolverConfig& cfg);

/// Evolution under the chi_eps(N)-truncated generator. Requires cfg.eps > 0.
ReferenceResult truncated_dynamics(const CMFockVector& u0, const CVec& V, const SolverConfig& cfg, int substeps = 1);

/// ||u_G(t) - v_eps(t)|| per node, both from the reference integrator.
RVec truncation_gap(const CMFockVector& u0, const CVec& V, const SolverConfig& cfg, int substeps = 1);

struct ExpansionResult {
    RVec deltas;                   // requested deltas snapped to the time grid
    std::vector<RVec> remainders;  // remainders[k][j] for k = 0, 1, 2
    RVec slopes;                   // log-log slopes of remainders[k] against delta
    double series_tail = 0.0;      // largest weighted norm of the last Dyson term kept
};

/// Remainders ||e^{(alpha1/2) N}(u_G(t0 + delta/h) - S_k)|| of the free / single / double Duhamel
/// partial sums S_k, started from u_t0 = u_G(t0). u_G is the Dyson series summed to `terms` terms,
/// all terms marched together on `steps` trapezoid steps up to the largest delta.
ExpansionResult expansion_check(const CMFockVector& u_t0, const PotentialPair& V, const SolverConfig& cfg,
                                const RVec& deltas, int steps = 256, int terms = 10);

struct PerturbResult {
    RVec diff;          // ||u_inf,new(t) - u_inf,ref(t)|| per node
    double sup = 0.0;
    double dV = 0.0;    // ||V1' - V1||_{r'} + ||V2' - V2||_{r'}
};

PerturbResult perturb_potential(const CMFockVector& u0, const PotentialPair& ref, const PotentialPair& other,
                                const SolverConfig& cfg);

/// M(L x) / M(x) for one random trajectory triple shaped like the solution near t = 0.
double probe_contraction(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, unsigned long long seed);

/// Largest of probe_contraction over seeds 1..probes.
double contraction_ratio(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, int probes = 2);

/// Largest gamma = gamma_start 2^{-k}, k <= 20, whose contraction ratio is at most target.
double calibrate_gamma(const CMFockVector& like, const PotentialPair& V, const SolverConfig& cfg, double gamma_start,
                       double target = 0.5);

}  // namespace fockcm
