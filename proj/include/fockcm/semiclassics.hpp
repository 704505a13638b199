#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fockcm/center_of_mass.hpp"

namespace fockcm {

/// Phase-space point X = (x, xi), x macroscopic (the state lives at microscopic y = x / h).
struct PhasePoint {
    RVec x;
    RVec xi;
};

struct CoherentState {
    double h = 1.0;
    PhasePoint X0;
    CVec values;           // on the microscopic grid
    double defect = 0.0;   // |1 - norm| of the periodized packet before renormalization
};

/// (h/pi)^{d/4} e^{i xi0.(y - x0/(2h))} e^{-h |y - x0/h|^2 / 2}, summed over neighbouring images and
/// renormalized. Throws std::invalid_argument unless h > 0 and 2 delta <= h^{-1/2} <= L / 8.
CoherentState coherent_state(double h, const PhasePoint& X0, const GridSpec& g);

/// Closed form e^{-|X - Y|^2 / (2h)} of |<phi_X, phi_Y>|^2 on R^d.
double coherent_overlap_sq(double h, const PhasePoint& X, const PhasePoint& Y);

/// Husimi density <phi_X, rho phi_X> on x nodes every `coarsen` grid points and xi nodes at the
/// FFT wavenumbers. values[xnode * P + kslot], P = M^d.
struct HusimiField {
    double h = 1.0;
    GridSpec grid;
    int coarsen = 1;
    RVec values;

    std::size_t x_nodes() const;
    /// Macroscopic coordinate of x node j on axis a.
    double x_at(std::size_t j, int axis) const;
    /// Wavenumber of slot k on axis a.
    double xi_at(std::size_t k, int axis) const;
    /// dX / (2 pi h)^d per phase node.
    double cell() const;
    /// sum of values * cell()
    double mass() const;
    /// Phase point carrying the largest value.
    PhasePoint argmax() const;
};

/// rho = sum_j w_j |psi_j><psi_j|.
HusimiField husimi(const std::vector<CVec>& psis, const RVec& weights, const GridSpec& g, double h, int coarsen = 1);
/// Partial trace over the Fock factor: slot-weighted sum over sectors and relative points of
/// e^{-i xi.y} times the stored y_G functions. Slot offsets must lie on the wavenumber lattice.
HusimiField husimi(const CMFockVector& v, double h, int coarsen = 1);

/// Wigner function of a pair on the grid, d = 1: W[v,u](y_m, xi_k) = 2 delta sum_j e^{-i xi_k 2 j delta}
/// u(y_{m+j}) conj v(y_{m-j}), j in [-M/4, M/4), xi_k = pi k / L, k in [-M/2, M/2). Index m * M + kslot.
CVec wigner_pair(const CVec& v, const CVec& u, const GridSpec& g);
/// xi node of Wigner slot k.
double wigner_xi(const GridSpec& g, std::size_t k);
/// sum a W[v,u] delta (pi / L) / (2 pi)
cplx wigner_pairing(const CVec& a, const CVec& W, const GridSpec& g);

/// Symbol sampled on the Wigner grid at scale h: a(h y_m, xi_k).
CVec sample_symbol(const std::function<cplx(double, double)>& a, const GridSpec& g, double h);
/// a^Weyl(hx, D_x) psi for a sampled by sample_symbol, d = 1. Dual to wigner_pair.
CVec weyl_apply(const CVec& a, const CVec& psi, const GridSpec& g);

/// Finite union of closed energy intervals with a smooth cutoff falling from 1 to 0 over `width`.
struct EnergyBand {
    std::vector<std::pair<double, double>> intervals;
    double width = 0.5;
    /// 1 when every energy is inside.
    bool whole = false;

    double chi(double E) const;
};

struct BandMass {
    double inside = 0.0;
    double outside = 0.0;
};

/// Spectral mass of a wave function under chi(|k|^2) and 1 - chi.
BandMass energy_band_mass(const CVec& psi, const GridSpec& g, const EnergyBand& F);
/// Same with energy |xi - k|^2 per slot, as for the free evolution; the vacuum sits at |xi|^2.
BandMass energy_band_mass(const CMFockVector& v, const EnergyBand& F);

}  // namespace fockcm
