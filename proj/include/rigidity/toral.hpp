#ifndef RIGIDITY_TORAL_HPP
#define RIGIDITY_TORAL_HPP

#include "rigidity/int_poly.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rigidity {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Element of GL(d, Z): integer matrix with |det| = 1, acting on the torus.
class ToralAutomorphism {
public:
    explicit ToralAutomorphism(IntMatrix m);
    static ToralAutomorphism companion(const IntPoly& monic);
    /// Block-diagonal direct sum.
    ToralAutomorphism direct_sum(const ToralAutomorphism& other) const;

    int dim() const { return static_cast<int>(m_.rows()); }
    const IntMatrix& matrix() const { return m_; }
    Eigen::MatrixXd matrix_d() const { return m_.cast<double>(); }
    /// Exact integer inverse (adjugate over det, det = +-1).
    const IntMatrix& inverse() const { return inv_; }
    Eigen::MatrixXd inverse_d() const { return inv_.cast<double>(); }

    const IntPoly& char_poly() const { return char_poly_; }

private:
    IntMatrix m_, inv_;
    IntPoly char_poly_;
};

/// Exact characteristic polynomial (monic, ascending coefficients).
IntPoly char_poly(const IntMatrix& m);

/// One group of eigenvalues sharing a modulus.
struct ModulusCluster {
    double modulus = 0;           // certified up to `radius`
    double radius = 0;            // error bound on `modulus`
    int multiplicity = 0;         // algebraic, summed over the cluster
    Eigen::MatrixXd space;        // orthonormal basis of the Lyapunov space
    bool jordan_defect = false;   // true iff L is non-semisimple on the space
    std::vector<int> factor_ids;  // which irreducible factors contribute
};

struct LyapunovData {
    std::vector<ModulusCluster> clusters;  // ascending modulus
    std::vector<std::pair<IntPoly, int>> factorization;
    int dim = 0;

    int stable_count() const;    // clusters with modulus < 1
    int unstable_count() const;  // clusters with modulus > 1
};

/// Groups eigenvalue moduli within `tol`; equal moduli inside a group must be
/// certifiably equal (conjugation or an exact p(x) = +-p(-x) relation),
/// otherwise AmbiguousModuliError.
LyapunovData lyapunov_data(const ToralAutomorphism& L, double tol = 1e-9);

/// No eigenvalue on the unit circle.  Numeric decision from certified
/// enclosures, cross-checked exactly: +-1 roots, cyclotomic divisors, and the
/// gcd with the coefficient reversal (reciprocal pairs).  Throws
/// IndeterminateError if neither route decides.
bool is_hyperbolic(const ToralAutomorphism& L, double tol = 1e-9);

/// Characteristic polynomial irreducible over Q.
bool is_irreducible(const ToralAutomorphism& L);

/// All irreducible factors of the characteristic polynomial share one set of
/// root moduli (the paper's criterion for dense Lyapunov leaves).
bool is_weakly_irreducible(const ToralAutomorphism& L, double tol = 1e-12);

/// Partition of the moduli into roles.  Stable moduli ascending: the first
/// `ss_count` go to E^ss, the rest to E^ws.  In symplectic mode the last
/// `uu_count` unstable moduli (the largest) go to E^uu.
struct SplittingSpec {
    int ss_count = 1;
    std::optional<int> uu_count;  // engaged for the symplectic splitting
};

struct StableSplitting {
    Eigen::MatrixXd ss, ws, u;          // orthonormal bases
    Eigen::MatrixXd uu, wu;             // symplectic mode only (0 cols otherwise)
    std::vector<double> ss_moduli, ws_moduli, u_moduli;
};

StableSplitting stable_splitting(const ToralAutomorphism& L, const SplittingSpec& spec,
                                 double tol = 1e-9);

/// r_ss = log(rho_min)/log(rho_max) >= 1 on E^ss.
double contraction_ratio(const ToralAutomorphism& L, const SplittingSpec& spec);

/// L^T J L = J exactly, J an invertible integer skew form; d must be even.
bool is_symplectic(const ToralAutomorphism& L, const IntMatrix& J);

/// Root-modulus pattern for the companion-matrix scenario search.
struct ModulusPattern {
    int stable = 0;
    int unstable = 0;
    std::optional<int> distinct_stable;    // count of distinct stable moduli
    std::optional<int> distinct_unstable;
    bool real_stable_only = false;
    std::string str() const;
};

/// Enumerates monic integer polynomials of the given degree with constant
/// term +-1 and |coefficients| <= coeff_bound; returns the companion matrices
/// of the hyperbolic ones whose root-modulus pattern matches.  Deterministic
/// enumeration order.
std::vector<ToralAutomorphism> search_companion(int degree, const ModulusPattern& pattern,
                                                int coeff_bound, int degree_cap = 16,
                                                std::size_t max_results = SIZE_MAX);

} // namespace rigidity

#endif
