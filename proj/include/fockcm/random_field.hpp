#pragma once

#include <cstdint>
#include <functional>

#include "fockcm/fock.hpp"

namespace fockcm {

/// Name of the seed splitting rule; bump when split_seed changes.
inline constexpr const char* kSplitRule = "split-v1";

/// Child seed: splitmix64 finalizer of parent + golden * (index + 1).
std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index);

struct WhiteNoiseSample {
    GridSpec grid;
    RVec values;  // i.i.d. N(0, 1 / delta^d)
    std::uint64_t seed = 0;
};

struct PotentialField {
    GridSpec grid;
    RVec values;
    std::uint64_t seed = 0;
};

WhiteNoiseSample sample_white_noise(std::uint64_t seed, const GridSpec& g);

/// V(x) = delta^d sum_y V(y - x) X_y, circular, computed with FFTs. V must be real.
PotentialField potential_field(const CVec& V, const WhiteNoiseSample& noise);

/// F(x, omega) = sum_n delta^{dn} sum_y F_n(y_1 - x, ..., y_n - x) :X_{y_1} ... X_{y_n}:
/// with F_n = f_n / sqrt(n!) taken from the Fock vector u. Orders above 2 throw.
cplx chaos_eval(const FockVector& u, const WhiteNoiseSample& noise, std::size_t x);

struct McResult {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct McComplexResult {
    McResult re;
    McResult im;
};

/// Sample mean and standard error of estimator(split_seed(seed, i)), i < n_samples.
McResult mc_expect(const std::function<double(std::uint64_t)>& estimator, int n_samples, std::uint64_t seed);
McComplexResult mc_expect_complex(const std::function<cplx(std::uint64_t)>& estimator, int n_samples, std::uint64_t seed);

}  // namespace fockcm
