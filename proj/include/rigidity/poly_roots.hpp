#ifndef RIGIDITY_POLY_ROOTS_HPP
#define RIGIDITY_POLY_ROOTS_HPP

#include "rigidity/int_poly.hpp"

#include <complex>
#include <vector>

namespace rigidity {

/// One root of a squarefree polynomial together with a certified inclusion
/// radius: the disk |w - z| <= radius contains exactly one true root.
struct RootEnclosure {
    std::complex<double> z;
    double radius;
};

/// All complex roots of a squarefree integer polynomial, with inclusion
/// radii derived from residuals (Aberth iteration + a posteriori disks).
/// Throws if the coefficients are not exactly representable in double or if
/// the disks cannot be made disjoint.
std::vector<RootEnclosure> certified_roots(const IntPoly& p);

/// Roots of a real-coefficient polynomial given as ascending doubles
/// (no certification; used for fast scans).
std::vector<std::complex<double>> roots_fast(const std::vector<double>& coeffs);

} // namespace rigidity

#endif
