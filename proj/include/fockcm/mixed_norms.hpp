#pragma once

#include <vector>

#include "fockcm/center_of_mass.hpp"

namespace fockcm {

struct WeightParams {
    double h = 0.1;
    double gamma = 1.0;
    double alpha0 = -1.0;
    double alpha1 = 1.0;
    double C_V = 1.0;

    double M_alpha01() const;
    /// gamma (alpha1 - alpha)
    double T_alpha(double alpha) const { return gamma * (alpha1 - alpha); }
    /// Throws std::invalid_argument unless h > 0, gamma > 0 and alpha0 < alpha1.
    void validate() const;
};

/// States sampled on a uniform grid of non-negative times.
struct Trajectory {
    RVec times;
    std::vector<CMFockVector> states;
};

/// Per-node squared sector norms of a trajectory: sq[k][n] = ||u^{(n)}(t_k)||^2, n = 0..nmax.
struct SectorProfile {
    RVec times;
    std::vector<RVec> sq;

    /// ||e^{alpha N} u(t_k)||
    double weighted_norm(std::size_t k, double alpha) const;
};

SectorProfile sector_profile(const Trajectory& tr);

/// Finite grids standing in for the continuous suprema.
struct SupGrid {
    int alpha_samples = 16;   // alpha_k = alpha0 + k (alpha1 - alpha0) / K, k < K
    int tau_refine = 4;       // tau candidates per time step
    int delta_substeps = 4;   // delta_j = delta_max 2^{-j / substeps}
};

enum class MWhich { inf, two, one };

/// One of M_inf, M_2, M_1 for the triple (u_inf, u_2, u_1). Times are one-sided (t >= 0).
/// Throws std::invalid_argument when the needed window holds no positive node.
double weighted_M(const SectorProfile& u_inf, const SectorProfile& u_2, const SectorProfile& u_1,
                  const WeightParams& w, MWhich which, const SupGrid& grid = {});
double weighted_M_total(const SectorProfile& u_inf, const SectorProfile& u_2, const SectorProfile& u_1,
                        const WeightParams& w, const SupGrid& grid = {});

/// Non-negative scalar function of time, linear between nodes and constant outside them.
class TimeProfile {
public:
    TimeProfile(RVec times, RVec values);
    /// integral over [a, b] of g^p, times (h t)^{-1/2} when singular_h > 0. p in {1, 2}.
    double integral(double a, double b, int p, double singular_h = 0.0) const;
    /// integral(0, tau, ...) for an increasing list of tau, in one pass over the nodes.
    RVec running_integral(const RVec& taus, int p, double singular_h = 0.0) const;
    double value(double t) const;
    const RVec& times() const { return t_; }
    double first_positive() const;

private:
    RVec t_;
    RVec v_;
};

/// N_{p,i,T,h} of a trajectory given by its node norms ||phi(t_k)||, p in {1,2}, i in {1..4}.
double n_norm(const TimeProfile& phi, int p, int i, double T, double h, const SupGrid& grid = {});
double n_norm(const Trajectory& phi, int p, int i, double T, double h, const SupGrid& grid = {});

struct Interval {
    int n = 0;
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

enum class DyadicMode { around_T, around_0_and_T };

struct DyadicPartition {
    double T = 1.0;
    DyadicMode mode = DyadicMode::around_T;
    std::vector<Interval> intervals;  // increasing lo
    double covered() const;
};

/// J^n_T = [(1 - 2^{-n}) T, (1 - 2^{-n-1}) T) for 0 <= n <= n_max; around_0_and_T replaces
/// J^0 by [T/4, T/2) and adds J^n = 2^n J^0 for -n_max <= n < 0.
DyadicPartition dyadic_partition(double T, DyadicMode mode, int n_max = 20);
Interval dyadic_interval(double T, int n);

/// alpha'_0 = (alpha1 + 6 alpha) / 7, alpha'_n = (alpha1 + (2^{n+2} - 1) alpha) / 2^{n+2} for n >= 1.
double alpha_prime_schedule(double alpha, double alpha1, int n);

/// Equivalence constants kappa_{p,1} (N_1 vs N_2, N_3), kappa_{p,2} (N_2 vs N_4) and their product.
struct KappaBand {
    double k1 = 1.0;
    double k2 = 1.0;
    double total() const { return k1 * k2; }
};
KappaBand kappa_band(int p);

}  // namespace fockcm
