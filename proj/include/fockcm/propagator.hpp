#pragma once

#include <cstdint>
#include <limits>

#include "fockcm/center_of_mass.hpp"

namespace fockcm {

/// e^{-it(xi - D)^2} on one grid function: Fourier coefficient k multiplied by e^{-it|xi - k|^2}.
CVec evolve_free(const CVec& psi, const GridSpec& g, double t, const RVec& xi = {});

/// Free evolution of every slot: vacuum times e^{-it|xi|^2}, each sector evolved in y_G only.
CMFockVector evolve_free_fock(const CMFockVector& v, double t);

/// Largest |k_a| (angular) carrying more than `tail` of the spectral energy beyond it:
/// the smallest K with energy outside the cube max_a |k_a| <= K at most tail * total.
double band_kmax(const CVec& g, const GridSpec& grid, double tail = 1e-3);

/// No-wrap window L / (4 v_max) with group velocity v_max = 2 k_max.
double wrap_time(const CVec& g, const GridSpec& grid, double tail = 1e-3);

/// ||U(t) g||_inf (4 pi |t|)^{d/2} / ||g||_1. Throws std::domain_error for t = 0 or |t| > wrap_time.
double dispersive_ratio(const CVec& g, const GridSpec& grid, double t, double tail = 1e-3);

/// Least-squares slope of log ||U(t) g||_inf against log t.
double decay_slope(const CVec& g, const GridSpec& grid, const RVec& times);

/// Exact rational for exponent arithmetic.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
};

struct StrichartzExponents {
    int d = 3;
    Rational sigma;       // d / 2
    Rational inv_r;       // 1 / r_sigma = (sigma - 1) / (2 sigma); zero at sigma = 1
    Rational inv_r_prime; // 1 / r'_sigma = (sigma + 1) / (2 sigma)
    bool endpoint_available = true;  // false when sigma <= 1
    double r() const { return inv_r.num == 0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_r.value(); }
    double r_prime() const { return 1.0 / inv_r_prime.value(); }
};

StrichartzExponents strichartz_exponents(int d);

/// 1/q + sigma/r = sigma/2 with reciprocal exponents given exactly (0 encodes infinity).
bool admissible_check(const Rational& inv_q, const Rational& inv_r, const Rational& sigma);

/// (integral_0^T ||U(t) g||_{L^r}^2 dt)^{1/2} / ||g||_2 by the composite trapezoid rule with nt intervals.
double strichartz_quotient(const CVec& g, const GridSpec& grid, double r, double T, int nt);

}  // namespace fockcm
