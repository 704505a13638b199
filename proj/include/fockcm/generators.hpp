#pragma once

#include <random>

#include "fockcm/center_of_mass.hpp"
#include "fockcm/mixed_norms.hpp"

namespace fockcm {

using Rng = std::mt19937_64;

/// Complex function with i.i.d. Gaussian Fourier coefficients on |k_a| <= band per axis
/// (band < 0 means every frequency), normalized to unit L^2 norm.
CVec random_function(Rng& rng, const GridSpec& g, int band = -1);
/// Real-valued version of random_function.
CVec random_real_function(Rng& rng, const GridSpec& g, int band = -1);

/// Periodic sum of exp(-|y - c|^2 / (2 sigma^2)) e^{i k0.y}, summed over neighbouring images.
CVec periodized_gaussian(const GridSpec& g, const RVec& center, double sigma, const RVec& k0 = {});

/// Random symmetric Fock vector; every particle frequency satisfies |k_a| <= band.
/// Unit norm. band < 0 means unrestricted.
FockVector random_fock(Rng& rng, const GridSpec& g, int nmax, int band = -1);

/// Random CM vector built from random_fock slots, xi drawn in [-xi_max, xi_max]^d.
CMFockVector random_cm(Rng& rng, const GridSpec& g, int nmax, int band, int nslots = 1, double xi_max = 0.0,
                       const std::vector<int>& refine = {});

/// Random non-negative profile on K+1 uniform nodes of [0, T/h]: a mix of sin^2 bumps on
/// dyadic intervals J^n_T, smooth trigonometric profiles and (1 - ht/T)^{-beta} blow-ups.
TimeProfile random_time_profile(Rng& rng, double T, double h, int K);

/// Largest per-particle band keeping the total momentum of n particles in band.
int safe_band(const GridSpec& g, int n);

}  // namespace fockcm
