#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fockcm/grid.hpp"

namespace fockcm {

/// Truncated bosonic Fock vector on a periodic grid.
///
/// Sector n (1-based) is stored row-major over n one-particle indices, the last
/// particle varying fastest, so it holds (M^d)^n entries with weight delta^{dn}.
struct FockVector {
    GridSpec grid;
    int nmax = 0;
    cplx vacuum{0.0, 0.0};
    std::vector<CVec> sectors;  // sectors[n-1]
    double dropped_mass = 0.0;   // accumulated L^2 mass pushed past nmax

    FockVector() = default;
    FockVector(const GridSpec& g, int n_max);

    CVec& sector(int n) { return sectors.at(static_cast<std::size_t>(n - 1)); }
    const CVec& sector(int n) const { return sectors.at(static_cast<std::size_t>(n - 1)); }
    /// Number of entries of sector n.
    std::size_t sector_size(int n) const { return ipow(grid.points(), n); }
    /// delta^{dn}
    double weight(int n) const;
};

enum class ChaosDirection { pack, unpack };

/// Orthogonal projection onto symmetric tensors of n particles with P points each.
CVec symmetrize(const CVec& t, int n, std::size_t P);

double fock_norm(const FockVector& u);
/// Squared L^2 norm of sector n (0 = vacuum).
double sector_norm2(const FockVector& u, int n);
/// Conjugate-linear in the first argument.
cplx inner(const FockVector& u, const FockVector& v);

/// a*(f). Sectors of u are assumed symmetric. Outflow from sector nmax is dropped
/// and its mass added to dropped_mass.
FockVector create(const CVec& f, const FockVector& u);
/// a(g), contracting the last slot against conj(g) with weight delta^d.
FockVector annihilate(const CVec& g, const FockVector& u);
/// (a(V) + a*(V)) / sqrt(2). Complex V throws unless allow_complex is set.
FockVector field_op(const CVec& V, const FockVector& u, bool allow_complex = false);
/// e^{alpha N}. Throws std::overflow_error when |alpha| * nmax > 700.
FockVector number_weight(double alpha, const FockVector& u);
/// pack multiplies sector n by sqrt(n!), unpack divides.
FockVector chaos_scale(const FockVector& u, ChaosDirection dir);

FockVector axpy(cplx a, const FockVector& x, const FockVector& y);  // a x + y
FockVector scaled(cplx a, const FockVector& x);
/// phi tensor-power n placed in sector n (vacuum 1 for n = 0).
FockVector product_state(const CVec& phi, int n, const GridSpec& g, int nmax);

/// Binary dump: "FOCK", u32 version, u32 d, u32 M, f64 delta, u32 nmax, then vacuum and
/// sectors 1..nmax as little-endian complex64.
void write_dump(std::ostream& os, const FockVector& u);
FockVector read_dump(std::istream& is);

}  // namespace fockcm
