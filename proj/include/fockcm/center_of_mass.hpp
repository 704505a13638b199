#pragma once

#include <string>
#include <vector>

#include "fockcm/fock.hpp"

namespace fockcm {

/// One parameter slot: momentum offset xi, quadrature weight, vacuum and sectors 1..nmax.
struct CMSlot {
    RVec xi;
    double weight = 1.0;
    cplx vacuum{0.0, 0.0};
    std::vector<CVec> sectors;
};

/// Fock vector in center-of-mass coordinates.
///
/// Sector n stores a box y_G x (y'_1, ..., y'_{n-1}). y_G has M^d points at spacing delta,
/// each free relative coordinate has (r_n M)^d points at spacing delta / r_n and y'_n is
/// minus their sum. Flat index = yG * rel_points(n) + rel, each coordinate row-major over
/// its d axes. The box covers the lab torus n^d times, so its quadrature weight is the
/// plain product of spacings (the mu weight n^d divided by that multiplicity).
struct CMFockVector {
    GridSpec grid;
    int nmax = 0;
    std::vector<int> refine;  // refine[n-1] = r_n, ignored for n = 1
    std::vector<CMSlot> slots;
    double dropped_mass = 0.0;

    CMFockVector() = default;
    /// Empty refine means r_n = n. Throws on a refinement factor below 2 for n >= 2.
    CMFockVector(const GridSpec& g, int n_max, int nslots = 1, std::vector<int> refine_factors = {});

    int r(int n) const { return refine.at(static_cast<std::size_t>(n - 1)); }
    std::size_t rel_points(int n) const;
    std::size_t sector_size(int n) const { return grid.points() * rel_points(n); }
    double rel_spacing(int n) const { return grid.delta / r(n); }
    /// (delta / r_n)^{d(n-1)}
    double rel_weight(int n) const;
    /// Axis lengths of the sector-n box: d times M, then d(n-1) times r_n M.
    std::vector<int> box_dims(int n) const;

    CVec& sector(int slot, int n) { return slots.at(static_cast<std::size_t>(slot)).sectors.at(static_cast<std::size_t>(n - 1)); }
    const CVec& sector(int slot, int n) const {
        return slots.at(static_cast<std::size_t>(slot)).sectors.at(static_cast<std::size_t>(n - 1));
    }
    int nslots() const { return static_cast<int>(slots.size()); }
};

std::vector<int> default_refine(int nmax);

CMFockVector to_cm(const FockVector& u, const std::vector<int>& refine = {}, const RVec& xi = {});
/// Several lab vectors as parameter slots of one CM vector.
CMFockVector to_cm_slots(const std::vector<FockVector>& us, const std::vector<RVec>& xis, const RVec& weights,
                         const std::vector<int>& refine = {});
FockVector from_cm(const CMFockVector& v, int slot = 0);

/// Integral against mu_n of a function on the relative lattice (size rel_points(n)).
cplx mu_integral(const CVec& g, int n, const GridSpec& grid, int r);

CMFockVector ag_apply(const CVec& V, const CMFockVector& v);
CMFockVector ag_star_apply(const CVec& V, const CMFockVector& v);

/// Inner L^q over y_G, outer L^p over slots, vacuum atoms, sectors and relative points.
/// p or q <= 0 or infinite means the max norm.
double mixed_norm(const CMFockVector& v, double p, double q);
/// Same restricted to one sector n >= 0 (n = 0 is the vacuum atom).
double sector_mixed_norm(const CMFockVector& v, int n, double p, double q);
/// Order-swapped norm of sector n >= 1: inner L^p over relative points and slots, outer L^q over y_G.
double swapped_sector_norm(const CMFockVector& v, int n, double p, double q);

cplx cm_inner(const CMFockVector& a, const CMFockVector& b);
double cm_norm(const CMFockVector& v);
double cm_sector_norm2(const CMFockVector& v, int n);
CMFockVector cm_zero_like(const CMFockVector& v);
CMFockVector cm_axpy(cplx a, const CMFockVector& x, const CMFockVector& y);
CMFockVector cm_scaled(cplx a, const CMFockVector& x);
void cm_axpy_inplace(cplx a, const CMFockVector& x, CMFockVector& y);
CMFockVector cm_number_weight(double alpha, const CMFockVector& v);
/// Keep only sector n (0 = vacuum).
CMFockVector cm_sector_only(const CMFockVector& v, int n);

/// Max relative deviation of each sector from its images under the generating transpositions
/// (adjacent free coordinates, and last free coordinate with the derived one).
double cm_symmetry_defect(const CMFockVector& v);

/// Lab-frame dGamma(D_y) along one axis.
FockVector lab_total_derivative(const FockVector& u, int axis);
/// D_{y_G} along one axis, relative coordinates untouched.
CMFockVector cm_center_derivative(const CMFockVector& v, int axis);

/// Exponent tuple for the L^p bounds: 1 <= qp <= pp <= 2 <= p <= q <= inf, r' from 1/r' = 1/2 + 1/qp - 1/pp.
struct LpExponents {
    double qp = 2.0;
    double pp = 2.0;
    double p = 2.0;
    double q = 2.0;
    double rp() const;
    /// Throws std::invalid_argument when the ordering is violated.
    void validate() const;
    std::string label() const;
};

struct BoundRow {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0); }
};

/// Both sides of every creation/annihilation L^p bound on v, plus the weighted versions
/// with weights alpha < alpha_prime.
std::vector<BoundRow> lp_bound_report(const CVec& V, const CMFockVector& v, const LpExponents& e, double alpha,
                                      double alpha_prime);

/// ||V(y_G + y') phi(y_G)||_{L^2_{y'} L^{qp}_{y_G}} with y' on the lab lattice.
double young_lhs(const CVec& V, const CVec& phi, const GridSpec& g, double qp);

}  // namespace fockcm
