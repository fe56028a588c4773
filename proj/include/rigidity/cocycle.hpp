#ifndef RIGIDITY_COCYCLE_HPP
#define RIGIDITY_COCYCLE_HPP

#include "rigidity/toral.hpp"
#include "rigidity/trig_poly.hpp"

#include <Eigen/Dense>
#include <vector>

namespace rigidity {

/// Invariant-bundle roles of the perturbed splitting.  SS_WEAK_SUB is the
/// weakest Lyapunov sub-block inside E^ss (product scenarios, where the
/// strong leaf factors and this 1-d direction is the one that matters).
enum class Role { U, SS, WS, SS_WEAK_SUB };

const char* role_name(Role r);

/// Df(x) = L + Dv(x) along orbits, with the linear reference splitting.
class JacobianCocycle {
public:
    JacobianCocycle(Perturbation f, SplittingSpec spec);

    const Perturbation& perturbation() const { return f_; }
    const StableSplitting& linear_split() const { return split_; }
    int dim() const { return f_.dim(); }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const { return f_.jacobian(x); }

    Eigen::MatrixXd linear_subspace(Role r) const;
    std::vector<double> role_moduli(Role r) const;
    int role_dim(Role r) const { return static_cast<int>(linear_subspace(r).cols()); }

private:
    Perturbation f_;
    StableSplitting split_;
    Eigen::MatrixXd ss_weak_sub_;        // weakest Lyapunov space inside ss
    std::vector<double> ss_weak_moduli_;
};

struct SubspaceResult {
    Eigen::MatrixXd basis;        // orthonormal columns
    int depth = 0;                // orbit depth at convergence
    double last_delta = 0;        // principal angle between final iterates
    std::vector<double> angle_history;
};

/// Computed bundle frames over a set of base points, with diagnostics.
struct FrameField {
    Role role = Role::SS;
    std::vector<Eigen::VectorXd> points;
    std::vector<SubspaceResult> frames;
    std::vector<double> invariance_defects;
};

FrameField compute_frame_field(const JacobianCocycle& c, const std::vector<Eigen::VectorXd>& points,
                               Role role, int n_max = 200, double tol = 1e-10);

/// Orbit power iteration for the perturbed bundle at x: forward push for U,
/// backward pull for SS, nested pull-then-push inside the stable bundle for
/// WS and SS_WEAK_SUB.  Cauchy criterion on principal angles; throws
/// NonDominatedError with the angle history if n_max is hit.
SubspaceResult invariant_subspace(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                                  int n_max = 200, double tol = 1e-10);

/// |proj_complement(Df(x) E(x))| relative to E(f x), both bundles computed
/// at the same depth settings.
double frame_invariance_defect(const JacobianCocycle& c, const Eigen::VectorXd& x, Role role,
                               int n_max = 200, double tol = 1e-10);

struct DominationReport {
    bool holds = false;
    double max_ss = 0;   // largest |Df u|, unit u in E^ss, over samples
    double min_ws = 0;   // smallest |Df v|, unit v in E^ws, over samples
    double margin = 0;   // min_ws - max_ss
};

DominationReport check_absolute_domination(const JacobianCocycle& c,
                                           const std::vector<Eigen::VectorXd>& samples,
                                           int n_max = 200, double tol = 1e-10);

struct BunchingReport {
    bool holds = false;
    double worst_product = 0;
    std::vector<double> products;  // per sample
};

/// |Df|E^ws| * |(Df|E^ws)^{-1}| * |(Df|E^u)^{-1}| < 1 at every sample
BunchingReport check_bunching(const JacobianCocycle& c, const std::vector<Eigen::VectorXd>& samples,
                              int n_max = 200, double tol = 1e-10);

struct RateEstimate {
    double slope = 0;        // per-step log-distance slope
    Role classification = Role::SS;
    int points_used = 0;
    double threshold_mid = 0;
};

/// Least-squares slope of log dist(f^n x, f^n y) over the window before the
/// distance hits 1e-13, first 20% discarded.  Classified ss/ws against the
/// midpoint of the linear log-moduli gap.  NotStableError if the distance
/// fails to decrease, UnclassifiableRateError in the dead zone.
RateEstimate contraction_rate(const JacobianCocycle& c, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, int n_steps);

} // namespace rigidity

#endif
