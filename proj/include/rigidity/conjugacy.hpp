#ifndef RIGIDITY_CONJUGACY_HPP
#define RIGIDITY_CONJUGACY_HPP

#include "rigidity/toral.hpp"
#include "rigidity/trig_poly.hpp"

#include <Eigen/Dense>
#include <vector>

namespace rigidity {

/// Delta split over R^d = E^u + E^ss + E^ws.
struct DeltaSplit {
    Eigen::VectorXd total, u, ss, ws;
};

/// Pointwise evaluator for the conjugacy h = id + Delta with h o f = L o h,
/// via the truncated orbit series
///   Delta^s(x) = -sum_{k>=1} L_s^{k-1} v^s(f^{-k} x)
///   Delta^u(x) =  sum_{k>=1} L_u^{-k}  v^u(f^{k-1} x).
/// The depth K is fixed at construction so the geometric tail bound is below
/// the tolerance; SlowConvergenceError if the cap is hit first.
class ConjugacyField {
public:
    ConjugacyField(Perturbation f, SplittingSpec spec, double tol = 1e-12, int depth_cap = 10000);

    const Perturbation& perturbation() const { return f_; }
    const StableSplitting& splitting() const { return split_; }
    int depth() const { return K_; }
    double tolerance() const { return tol_; }
    double tail_bound() const { return tail_; }

    DeltaSplit delta(const Eigen::VectorXd& x) const;
    Eigen::VectorXd delta_point(const Eigen::VectorXd& x) const { return delta(x).total; }
    Eigen::VectorXd h(const Eigen::VectorXd& x) const { return x + delta_point(x); }

    /// functional-equation residual |h(f x) - L h(x)| on the lift mod Z^d
    double residual_at(const Eigen::VectorXd& x) const;
    /// (max, mean) residual over sample points
    std::pair<double, double> residual(const std::vector<Eigen::VectorXd>& xs) const;

    /// solves h(y) = x (mod Z^d); result in [0,1)^d, verified to 1e-12
    Eigen::VectorXd h_inverse(const Eigen::VectorXd& x) const;

private:
    std::vector<Eigen::VectorXd> backward_orbit(const Eigen::VectorXd& x, int extra) const;
    DeltaSplit delta_on_orbit(const std::vector<Eigen::VectorXd>& orbit, int base) const;

    Perturbation f_;
    StableSplitting split_;
    double tol_, tail_ = 0;
    int K_ = 0;
    Eigen::MatrixXd Bs_, Bu_;        // stable ([ss|ws]) and unstable bases
    Eigen::MatrixXd Ms_, Mu_inv_;    // restrictions in those bases
    Eigen::MatrixXd Cs_, Cu_;        // coordinate extractors (rows of B^{-1})
    int n_ss_ = 0, n_ws_ = 0, n_u_ = 0;
};

} // namespace rigidity

#endif
