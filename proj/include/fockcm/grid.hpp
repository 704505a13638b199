#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fockcm {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Periodic grid shared by every axis: d axes, M points each, spacing delta.
struct GridSpec {
    int d = 1;
    int M = 32;
    double delta = 1.0;

    double L() const { return M * delta; }
    /// M^d
    std::size_t points() const;
    /// delta^d
    double cell() const;
    /// Throws std::invalid_argument when M is not a power of two >= 4, d < 1 or delta <= 0.
    void validate() const;
    bool operator==(const GridSpec& o) const { return d == o.d && M == o.M && delta == o.delta; }
};

/// Signed frequency of FFT slot i on an axis of n points, in [-n/2, n/2).
inline int signed_freq(long long i, long long n) { return static_cast<int>(i < n / 2 ? i : i - n); }

/// Slot of signed frequency (or index) k on an axis of n points.
inline std::size_t wrap_index(long long k, long long n) {
    long long r = k % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
}

inline std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

/// Unnormalized in-place DFT over a row-major array. sign = -1 forward, +1 backward.
void fft_nd(CVec& data, const std::vector<int>& dims, int sign);

/// DFT over the leading axes only, batched over a contiguous trailing block of size `trailing`.
void fft_leading(CVec& data, const std::vector<int>& lead_dims, std::size_t trailing, int sign);

/// Angular wavenumber 2*pi*k/L per slot of one axis, FFT ordering.
RVec wavenumbers(const GridSpec& g);

/// Grid coordinate of index i on one axis, in [0, L).
inline double coord(const GridSpec& g, long long i) { return static_cast<double>(i) * g.delta; }

/// Decode a flat one-particle index into its d axis indices.
void unflatten(std::size_t p, const GridSpec& g, int* out);

/// Discrete L^p norm with weight delta^d; p <= 0 means the max norm.
double lp_norm(const CVec& f, const GridSpec& g, double p);

/// Least-squares slope of log|y| against log|x|.
double loglog_slope(const RVec& x, const RVec& y);

}  // namespace fockcm
