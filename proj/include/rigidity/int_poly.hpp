#ifndef RIGIDITY_INT_POLY_HPP
#define RIGIDITY_INT_POLY_HPP

#include <gmpxx.h>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rigidity {

/// Polynomial with arbitrary-precision integer coefficients, stored in
/// ascending degree order.  The leading coefficient is kept nonzero
/// (the zero polynomial has an empty coefficient vector).
class IntPoly {
public:
    IntPoly() = default;
    explicit IntPoly(std::vector<mpz_class> coeffs);
    static IntPoly from_int(long v);
    static IntPoly monomial(int degree, const mpz_class& c = 1);
    /// Parses {c0, c1, ...} given as longs, ascending.
    static IntPoly of(std::initializer_list<long> coeffs);

    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero poly
    bool is_zero() const { return c_.empty(); }
    const mpz_class& operator[](int i) const { return c_[static_cast<size_t>(i)]; }
    const std::vector<mpz_class>& coeffs() const { return c_; }
    const mpz_class& leading() const { return c_.back(); }
    const mpz_class& constant() const;
    bool is_monic() const { return !c_.empty() && c_.back() == 1; }

    bool operator==(const IntPoly& o) const { return c_ == o.c_; }
    IntPoly operator+(const IntPoly& o) const;
    IntPoly operator-(const IntPoly& o) const;
    IntPoly operator*(const IntPoly& o) const;
    IntPoly operator-() const;

    mpz_class eval(const mpz_class& x) const;
    double eval_double(double x) const;

    IntPoly derivative() const;
    /// x^n p(1/x) with n = degree.
    IntPoly reversal() const;
    /// p(-x)
    IntPoly negate_argument() const;

    /// gcd of all coefficients, nonnegative (0 for the zero polynomial).
    mpz_class content() const;
    /// p / content with positive leading coefficient.
    IntPoly primitive_part() const;

    /// Exact division; throws Error if the division is not exact.
    IntPoly divide_exact(const IntPoly& d) const;
    /// True iff d divides p exactly over the integers.
    bool divisible_by(const IntPoly& d) const;

    /// gcd over Q, returned as a primitive integer polynomial with
    /// positive leading coefficient (subresultant PRS, exact).
    static IntPoly gcd(const IntPoly& a, const IntPoly& b);

    /// Square-free decomposition: list of (factor, multiplicity) with the
    /// factors primitive, square-free, and pairwise coprime (Yun).
    std::vector<std::pair<IntPoly, int>> squarefree_decomposition() const;

    std::string str() const;  // human-readable, e.g. "x^2 - 3x + 1"

private:
    void trim();
    std::vector<mpz_class> c_;
};

/// Irreducible factorization over Q of a nonzero integer polynomial.
/// Returned factors are primitive with positive leading coefficient and the
/// product of factors^multiplicity equals the input up to a rational unit
/// (sign and content).  Exact: no floating point enters the decision.
/// Throws UnsupportedDegreeError above `degree_cap` (default 16).
std::vector<std::pair<IntPoly, int>> factor_over_Q(const IntPoly& p, int degree_cap = 16);

} // namespace rigidity

#endif
