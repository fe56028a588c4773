#ifndef RIGIDITY_TRIG_POLY_HPP
#define RIGIDITY_TRIG_POLY_HPP

#include "rigidity/toral.hpp"

#include <Eigen/Dense>
#include <vector>

namespace rigidity {

/// One frequency of a vector-valued trigonometric polynomial:
/// a*cos(2 pi k.x) + b*sin(2 pi k.x).
struct TrigTerm {
    Eigen::VectorXi k;
    Eigen::VectorXd a, b;
};

/// Finite trigonometric polynomial v: T^d -> R^d with exact derivatives and
/// coefficient-derived C0/C1 upper bounds.
class TrigPolyMap {
public:
    explicit TrigPolyMap(int dim) : d_(dim) {}
    int dim() const { return d_; }
    void add_term(const Eigen::VectorXi& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
    const std::vector<TrigTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    double c0_bound() const;
    double c1_bound() const;

private:
    int d_;
    std::vector<TrigTerm> terms_;
};

// torus helpers on the lift
Eigen::VectorXd wrap01(const Eigen::VectorXd& x);
/// nearest-representative of x mod Z^d, componentwise in [-1/2, 1/2)
Eigen::VectorXd wrap_sym(const Eigen::VectorXd& x);
double torus_dist(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// f(x) = Lx + v(x); v is Z^d-periodic so f descends to the torus.
/// The C1 norm of v must stay below a fraction of the spectral gap of L
/// (default factor 0.05, overridable), else PerturbationTooLargeError.
class Perturbation {
public:
    Perturbation(ToralAutomorphism L, TrigPolyMap v, double smallness_factor = 0.05,
                 bool skip_smallness_check = false);

    const ToralAutomorphism& automorphism() const { return L_; }
    const TrigPolyMap& v() const { return v_; }
    int dim() const { return L_.dim(); }
    double c1_norm() const { return c1_; }
    double spectral_gap() const { return gap_; }

    /// lift map and its exact Jacobian
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
    /// unique preimage on the lift: f(result) = x to 1e-13; iterates must
    /// contract (|L^{-1}| Lip(v) < 1) else PerturbationTooLargeError
    Eigen::VectorXd inverse_point(const Eigen::VectorXd& x) const;

    Eigen::VectorXd apply_torus(const Eigen::VectorXd& x) const { return wrap01(apply(x)); }
    Eigen::VectorXd inverse_torus(const Eigen::VectorXd& x) const { return wrap01(inverse_point(x)); }

    const Eigen::MatrixXd& Ld() const { return Ld_; }
    const Eigen::MatrixXd& Linv() const { return Linv_; }

private:
    ToralAutomorphism L_;
    TrigPolyMap v_;
    Eigen::MatrixXd Ld_, Linv_;
    double c1_ = 0, gap_ = 0;
};

} // namespace rigidity

#endif
