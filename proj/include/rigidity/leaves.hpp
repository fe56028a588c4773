#ifndef RIGIDITY_LEAVES_HPP
#define RIGIDITY_LEAVES_HPP

#include "rigidity/cocycle.hpp"
#include "rigidity/conjugacy.hpp"
#include "rigidity/subres.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace rigidity {

/// Sampled arclength parametrization of a 1-d leaf piece, on the lift.
struct LeafCurve {
    Eigen::VectorXd base;
    Role role = Role::SS;
    double step = 0;
    std::vector<Eigen::VectorXd> points;  // points[0] = base, signed direction of `arclength`
};

struct LeafOptions {
    double chart = 0.1;          // torus units
    double step = 1e-3;          // integration step
    int n_max = 200;             // power-iteration depth cap
    double frame_tol = 1e-10;    // bundle Cauchy tolerance
};

/// Midpoint integration of the unit direction field of a 1-d role bundle.
/// Direction is kept continuous along the curve and aligned with the linear
/// eigenvector at the start.
LeafCurve integrate_leaf(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                         double arclength, double step, const LeafOptions& opt = {});

/// Endpoint of the leaf at signed arclength t (|t| <= chart).
Eigen::VectorXd leaf_point_at(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                              double t, const LeafOptions& opt = {});

/// Leaf point generated dynamically: a small integrated step at a far orbit
/// point, conjugated back (forward orbit for ss roles, backward for ws).
Eigen::VectorXd dynamical_leaf_point(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                                     double parameter, const LeafOptions& opt = {});

/// Affine leaf chart at x: phi_x(y) = lim_n (prod of per-step stretches)^{-1}
/// times the signed leaf coordinate of f^n y near f^n x (forward orbit).
/// Cauchy criterion on successive n; NoConvergenceError carries the tail.
/// The reachable tolerance is floored by orbit rounding amplified along the
/// unstable direction, so a looser `cauchy_tol` is legitimate for weak roles.
double leaf_affine_chart(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                         const Eigen::VectorXd& y, double cauchy_tol = 1e-10, int n_max = 40,
                         const LeafOptions& opt = {});

/// Point of W^ws(y) on the strong-stable leaf through p: the holonomy image
/// of p in W^ws(x) under sliding along W^ss from x to y.  1-d shooting with
/// bisection; both base leaves must stay inside one chart.
Eigen::VectorXd holonomy_point(const JacobianCocycle& c, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y_on_ss, const Eigen::VectorXd& p_on_ws,
                               const LeafOptions& opt = {});

struct HolonomyFit {
    GradedPolyMap fit;          // cubic fit of the lifted holonomy
    double nonsr_mass = 0;      // weight of the non-sub-resonance part
    double affinity_defect = 0; // rms residual of the best affine map
    int samples = 0;
};

/// Samples the ss-holonomy between two ws-leaves, maps both sides through
/// leaf charts (affine charts by default, raw arclength when
/// identity_charts), fits a cubic.
HolonomyFit lifted_holonomy_test(const JacobianCocycle& c, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y_on_ss, double chart_radius,
                                 int n_samples, bool identity_charts = false,
                                 const LeafOptions& opt = {});

/// Max norm of the component of h(y) - h(x) outside the linear E^ss, over
/// leaf points y at the given parameters (role SS, or SS_WEAK_SUB for the
/// product scenarios).
double test_strong_preservation(const ConjugacyField& field, const JacobianCocycle& c,
                                const Eigen::VectorXd& x, Role role,
                                const std::vector<double>& parameters,
                                const LeafOptions& opt = {});

/// Commutator-style loop defect of W^u and W^ss: the two far corners are
/// joined by leaf curves whose minimal gap, normalized by delta^2, vanishes
/// exactly when the pair is jointly integrable.
double joint_integrability_defect(const JacobianCocycle& c, const Eigen::VectorXd& x, double delta,
                                  const LeafOptions& opt = {});

struct HolderFit {
    double alpha = 0;
    double r_squared = 0;
};

/// Log-log regression of increment norms against scales.  Scales must span
/// at least two decades; the caller decides what to do with low r^2.
HolderFit holder_exponent(const std::vector<std::pair<double, double>>& scale_increment);

// ------------------------------------------------------------ normal forms --

/// Taylor data of a contraction germ at a fixed point, blocks aligned with
/// the spectrum.
struct TaylorGerm {
    ChiSpectrum spectrum;
    GradedPolyMap taylor;  // linear part block-diagonal, eigenvalue moduli in the chi bands

    TaylorGerm(ChiSpectrum spec, GradedPolyMap t);
};

struct NormalFormPair {
    GradedPolyMap phi;       // coordinate change, D_0 phi = Id
    SubresonancePolyMap normal_form;
};

/// Order-by-order coordinate change at a fixed point: degree m corrections
/// cancel every non-sub-resonance term of the conjugated germ, sub-resonance
/// terms stay in the normal form.  phi o F = P o phi through degree N within
/// 1e-10.  ResonanceAmbiguityError when a type sits within 2 eps of the
/// resonance boundary.
NormalFormPair normal_form_fixed_point(const TaylorGerm& germ, int N);

} // namespace rigidity

#endif
