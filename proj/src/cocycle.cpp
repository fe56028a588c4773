#include "rigidity/cocycle.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

#include <cmath>
#include <sstream>

namespace rigidity {

const char* role_name(Role r) {
    switch (r) {
        case Role::U: return "u";
        case Role::SS: return "ss";
        case Role::WS: return "ws";
        case Role::SS_WEAK_SUB: return "ss-weak-sub";
    }
    return "?";
}

JacobianCocycle::JacobianCocycle(Perturbation f, SplittingSpec spec)
    : f_(std::move(f)), split_(stable_splitting(f_.automorphism(), spec)) {
    LyapunovData ld = lyapunov_data(f_.automorphism());
    // weakest stable cluster that the spec assigns to ss
    int idx = spec.ss_count - 1;
    int seen = 0;
    for (const auto& cl : ld.clusters) {
        if (cl.modulus >= 1.0) continue;
        if (seen == idx) {
            ss_weak_sub_ = cl.space;
            ss_weak_moduli_ = {cl.modulus};
            break;
        }
        ++seen;
    }
}

Eigen::MatrixXd JacobianCocycle::linear_subspace(Role r) const {
    switch (r) {
        case Role::U: return split_.u;
        case Role::SS: return split_.ss;
        case Role::WS: return split_.ws;
        case Role::SS_WEAK_SUB: return ss_weak_sub_;
    }
    throw Error("linear_subspace: bad role");
}

std::vector<double> JacobianCocycle::role_moduli(Role r) const {
    switch (r) {
        case Role::U: return split_.u_moduli;
        case Role::SS: return split_.ss_moduli;
        case Role::WS: return split_.ws_moduli;
        case Role::SS_WEAK_SUB: return ss_weak_moduli_;
    }
    throw Error("role_moduli: bad role");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// orbit[j] = f^{j-n}(x) for j = 0..2n (torus representatives)
std::vector<VectorXd> two_sided_orbit(const Perturbation& f, const VectorXd& x, int n) {
    std::vector<VectorXd> z(static_cast<size_t>(2 * n) + 1);
    z[static_cast<size_t>(n)] = wrap01(x);
    for (int j = n - 1; j >= 0; --j) z[static_cast<size_t>(j)] = f.inverse_torus(z[static_cast<size_t>(j) + 1]);
    for (int j = n + 1; j <= 2 * n; ++j) z[static_cast<size_t>(j)] = f.apply_torus(z[static_cast<size_t>(j) - 1]);
    return z;
}

MatrixXd subspace_at_depth(const JacobianCocycle& c, const VectorXd& x, Role role, int n) {
    const Perturbation& f = c.perturbation();
    auto z = two_sided_orbit(f, x, n);
    auto J = [&](int j) { return c.jacobian(z[static_cast<size_t>(j)]); };

    switch (role) {
        case Role::U: {
            // push the linear seed from f^{-n}x forward to x
            MatrixXd B = c.linear_subspace(Role::U);
            for (int j = 0; j < n; ++j) B = la::orthonormalize(J(j) * B);
            return B;
        }
        case Role::SS: {
            // pull the linear seed from f^{n}x back to x (dominant backward)
            MatrixXd B = c.linear_subspace(Role::SS);
            for (int j = 2 * n; j > n; --j)
                B = la::orthonormalize(J(j - 1).partialPivLu().solve(B));
            return B;
        }
        case Role::WS:
        case Role::SS_WEAK_SUB: {
            // enclosing bundle pulled from f^{+n}x down to f^{-n}x, frames
            // stored along the way
            MatrixXd enclosing = (role == Role::WS)
                ? MatrixXd(c.dim(), c.linear_split().ss.cols() + c.linear_split().ws.cols())
                : c.linear_subspace(Role::SS);
            if (role == Role::WS) enclosing << c.linear_split().ss, c.linear_split().ws;
            std::vector<MatrixXd> frames(static_cast<size_t>(n) + 1);
            MatrixXd E = enclosing;
            for (int j = 2 * n; j > 0; --j) {
                E = la::orthonormalize(J(j - 1).partialPivLu().solve(E));
                if (j - 1 <= n) frames[static_cast<size_t>(j - 1)] = E;
            }
            // seed: component of the linear target inside the enclosing bundle,
            // pushed forward to x (slowest contraction dominates inside); each
            // step re-projects onto the enclosing bundle, otherwise rounding
            // leaks into the unstable direction and gets amplified
            MatrixXd target = c.linear_subspace(role);
            MatrixXd W = la::orthonormalize(frames[0] * (frames[0].transpose() * target));
            for (int j = 0; j < n; ++j) {
                W = J(j) * W;
                const MatrixXd& F = frames[static_cast<size_t>(j) + 1];
                W = la::orthonormalize(F * (F.transpose() * W));
            }
            return W;
        }
    }
    throw Error("subspace_at_depth: bad role");
}

} // namespace

SubspaceResult invariant_subspace(const JacobianCocycle& c, const VectorXd& x, Role role,
                                  int n_max, double tol) {
    SubspaceResult res;
    MatrixXd prev;
    const int step = 4;
    for (int n = step; n <= n_max; n += step) {
        MatrixXd cur = subspace_at_depth(c, x, role, n);
        if (prev.cols() > 0) {
            double delta = la::principal_angle(prev, cur);
            res.angle_history.push_back(delta);
            if (delta < tol) {
                // C0-closeness to the linear model
                double to_linear = la::principal_angle(cur, la::orthonormalize(c.linear_subspace(role)));
                if (to_linear > 0.2)
                    throw NonDominatedError("invariant_subspace: computed bundle drifted " +
                                            std::to_string(to_linear) + " rad from the linear model");
                res.basis = cur;
                res.depth = n;
                res.last_delta = delta;
                return res;
            }
        }
        prev = cur;
    }
    std::ostringstream os;
    os << "invariant_subspace(" << role_name(role) << "): no convergence within depth " << n_max
       << "; angle history:";
    for (double a : res.angle_history) os << " " << a;
    throw NonDominatedError(os.str());
}

double frame_invariance_defect(const JacobianCocycle& c, const VectorXd& x, Role role,
                               int n_max, double tol) {
    SubspaceResult at_x = invariant_subspace(c, x, role, n_max, tol);
    VectorXd fx = c.perturbation().apply_torus(x);
    SubspaceResult at_fx = invariant_subspace(c, fx, role, n_max, tol);
    return la::invariance_defect(c.jacobian(wrap01(x)), at_x.basis, at_fx.basis);
}

FrameField compute_frame_field(const JacobianCocycle& c, const std::vector<VectorXd>& points,
                               Role role, int n_max, double tol) {
    FrameField out;
    out.role = role;
    for (const auto& x : points) {
        out.points.push_back(x);
        out.frames.push_back(invariant_subspace(c, x, role, n_max, tol));
        out.invariance_defects.push_back(frame_invariance_defect(c, x, role, n_max, tol));
    }
    return out;
}

DominationReport check_absolute_domination(const JacobianCocycle& c,
                                           const std::vector<VectorXd>& samples,
                                           int n_max, double tol) {
    DominationReport rep;
    rep.min_ws = std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        MatrixXd Bss = invariant_subspace(c, x, Role::SS, n_max, tol).basis;
        MatrixXd Bws = invariant_subspace(c, x, Role::WS, n_max, tol).basis;
        MatrixXd J = c.jacobian(wrap01(x));
        rep.max_ss = std::max(rep.max_ss, la::operator_norm(J * Bss));
        rep.min_ws = std::min(rep.min_ws, la::smallest_singular_value(J * Bws));
    }
    rep.margin = rep.min_ws - rep.max_ss;
    rep.holds = rep.margin > 0;
    return rep;
}

BunchingReport check_bunching(const JacobianCocycle& c, const std::vector<VectorXd>& samples,
                              int n_max, double tol) {
    BunchingReport rep;
    for (const auto& x : samples) {
        VectorXd xw = wrap01(x);
        VectorXd fx = c.perturbation().apply_torus(xw);
        MatrixXd J = c.jacobian(xw);
        MatrixXd Bws = invariant_subspace(c, xw, Role::WS, n_max, tol).basis;
        MatrixXd Bws_next = invariant_subspace(c, fx, Role::WS, n_max, tol).basis;
        MatrixXd Bu = invariant_subspace(c, xw, Role::U, n_max, tol).basis;
        MatrixXd Bu_next = invariant_subspace(c, fx, Role::U, n_max, tol).basis;
        // restrictions in orthonormal frames
        MatrixXd Mws = Bws_next.transpose() * J * Bws;
        MatrixXd Mu = Bu_next.transpose() * J * Bu;
        double p = la::operator_norm(Mws) * (1.0 / la::smallest_singular_value(Mws)) *
                   (1.0 / la::smallest_singular_value(Mu));
        rep.products.push_back(p);
        rep.worst_product = std::max(rep.worst_product, p);
    }
    rep.holds = rep.worst_product < 1.0;
    return rep;
}

RateEstimate contraction_rate(const JacobianCocycle& c, const VectorXd& x, const VectorXd& y,
                              int n_steps) {
    const Perturbation& f = c.perturbation();
    std::vector<double> dist;
    VectorXd a = wrap01(x), b = wrap01(y);
    double d0 = torus_dist(a, b);
    if (d0 == 0) throw NotStableError("contraction_rate: coincident points");
    for (int k = 0; k < n_steps; ++k) {
        double d = torus_dist(a, b);
        dist.push_back(d);
        if (d < 1e-13) break;
        a = f.apply_torus(a);
        b = f.apply_torus(b);
    }
    // usable window ends at the distance minimum: past it, rounding noise
    // amplified along the unstable direction takes over
    size_t argmin = 0;
    for (size_t i = 1; i < dist.size(); ++i)
        if (dist[i] < dist[argmin]) argmin = i;
    if (argmin == 0 || dist[argmin] > 0.5 * dist[0])
        throw NotStableError("contraction_rate: forward distance not decreasing");
    // the last couple of points before the minimum already feel the noise
    size_t end = argmin >= 2 ? argmin - 2 : 0;
    std::vector<double> logd;
    for (size_t i = 0; i <= end; ++i) logd.push_back(std::log(dist[i]));
    if (logd.size() < 6)
        throw UnclassifiableRateError("contraction_rate: too few usable steps");

    // trailing window: drop the first 20% (Jordan-type transients)
    size_t start = logd.size() / 5;
    size_t m = logd.size() - start;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        double xi = static_cast<double>(i);
        double yi = logd[start + i];
        sx += xi; sy += yi; sxx += xi * xi; sxy += xi * yi;
    }
    double denom = m * sxx - sx * sx;
    if (denom == 0) throw UnclassifiableRateError("contraction_rate: degenerate window");
    double slope = (m * sxy - sx * sy) / denom;

    auto ssm = c.role_moduli(Role::SS);
    auto wsm = c.role_moduli(Role::WS);
    double log_ss_max = std::log(*std::max_element(ssm.begin(), ssm.end()));
    double log_ws_min = std::log(*std::min_element(wsm.begin(), wsm.end()));
    double gap = log_ws_min - log_ss_max;
    double mid = 0.5 * (log_ss_max + log_ws_min);

    RateEstimate est;
    est.slope = slope;
    est.points_used = static_cast<int>(m);
    est.threshold_mid = mid;
    double dead = 1e-9 * std::abs(gap);
    if (slope <= mid - dead) est.classification = Role::SS;
    else if (slope >= mid + dead) est.classification = Role::WS;
    else throw UnclassifiableRateError("contraction_rate: slope at the classification midpoint");
    return est;
}

} // namespace rigidity
