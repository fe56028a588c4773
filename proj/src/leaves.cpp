#include "rigidity/leaves.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace rigidity {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// unit direction of a 1-d role bundle, sign-aligned with `align`
VectorXd leaf_direction(const JacobianCocycle& c, const VectorXd& x, Role role,
                        const VectorXd& align, const LeafOptions& opt) {
    SubspaceResult r = invariant_subspace(c, x, role, opt.n_max, opt.frame_tol);
    if (r.basis.cols() != 1)
        throw Error("leaf operations require a 1-d bundle, got dim " +
                    std::to_string(r.basis.cols()));
    VectorXd e = r.basis.col(0);
    if (e.dot(align) < 0) e = -e;
    return e;
}

// one midpoint step from p along the role field
VectorXd midpoint_step(const JacobianCocycle& c, const VectorXd& p, Role role, double h,
                       VectorXd& dir_continuity, const LeafOptions& opt) {
    VectorXd e1 = leaf_direction(c, p, role, dir_continuity, opt);
    VectorXd mid = p + 0.5 * h * e1;
    VectorXd e2 = leaf_direction(c, mid, role, e1, opt);
    dir_continuity = e2;
    return p + h * e2;
}

} // namespace

LeafCurve integrate_leaf(const JacobianCocycle& c, const VectorXd& x, Role role,
                         double arclength, double step, const LeafOptions& opt) {
    if (std::abs(arclength) > opt.chart + 1e-12)
        throw Error("integrate_leaf: arclength exceeds the chart size");
    LeafCurve curve;
    curve.base = x;
    curve.role = role;
    curve.step = step;
    curve.points.push_back(x);
    if (arclength == 0) return curve;

    double sgn = arclength > 0 ? 1.0 : -1.0;
    double remaining = std::abs(arclength);
    VectorXd dir = leaf_direction(c, x, role, c.linear_subspace(role).col(0), opt);
    VectorXd p = x;
    while (remaining > 1e-15) {
        double h = std::min(step, remaining);
        p = midpoint_step(c, p, role, sgn * h, dir, opt);
        curve.points.push_back(p);
        remaining -= h;
    }
    return curve;
}

VectorXd leaf_point_at(const JacobianCocycle& c, const VectorXd& x, Role role, double t,
                       const LeafOptions& opt) {
    return integrate_leaf(c, x, role, t, opt.step, opt).points.back();
}

VectorXd dynamical_leaf_point(const JacobianCocycle& c, const VectorXd& x, Role role,
                              double parameter, const LeafOptions& opt) {
    const Perturbation& f = c.perturbation();
    if (parameter == 0) return x;
    if (std::abs(parameter) > opt.chart)
        throw Error("dynamical_leaf_point: parameter exceeds the chart size");
    auto moduli = c.role_moduli(role);
    double rho = *std::max_element(moduli.begin(), moduli.end());

    if (role == Role::SS || role == Role::SS_WEAK_SUB) {
        // forward orbit; the displacement shrinks with the leaf, transverse
        // contamination shrinks faster
        int n = std::clamp(static_cast<int>(std::ceil(std::log(1e-7 / std::abs(parameter)) / std::log(rho))), 2, 40);
        std::vector<VectorXd> z(static_cast<size_t>(n) + 1);
        z[0] = wrap01(x);
        for (int j = 1; j <= n; ++j) z[static_cast<size_t>(j)] = f.apply_torus(z[static_cast<size_t>(j) - 1]);
        VectorXd e = leaf_direction(c, z[0], role, c.linear_subspace(role).col(0), opt);
        double s = parameter;
        for (int j = 0; j < n; ++j) {
            MatrixXd J = c.jacobian(z[static_cast<size_t>(j)]);
            VectorXd e_next = leaf_direction(c, z[static_cast<size_t>(j) + 1], role, VectorXd(J * e), opt);
            s *= e_next.dot(J * e);
            e = e_next;
        }
        VectorXd y = z[static_cast<size_t>(n)] + s * e;
        for (int j = 0; j < n; ++j) y = f.inverse_point(y);
        return x + wrap_sym(y - wrap01(x));
    }

    // weak role: small backward conjugation sharpens the strong-direction
    // contamination of the integrated step without waking the unstable one
    int n = 2;
    std::vector<VectorXd> z(static_cast<size_t>(n) + 1);
    z[0] = wrap01(x);
    for (int j = 1; j <= n; ++j) z[static_cast<size_t>(j)] = f.inverse_torus(z[static_cast<size_t>(j) - 1]);
    // per-step stretch of the ws line along the forward push z_n -> z_0
    double prod = 1.0;
    VectorXd e = leaf_direction(c, z[static_cast<size_t>(n)], role, c.linear_subspace(role).col(0), opt);
    for (int j = n; j > 0; --j) {
        MatrixXd J = c.jacobian(z[static_cast<size_t>(j)]);
        VectorXd e_next = leaf_direction(c, z[static_cast<size_t>(j) - 1], role, VectorXd(J * e), opt);
        prod *= e_next.dot(J * e);
        e = e_next;
    }
    double t_back = parameter / prod;
    if (std::abs(t_back) > opt.chart) {
        // too expansive backward; fall back to direct integration
        return x + wrap_sym(leaf_point_at(c, wrap01(x), role, parameter, opt) - wrap01(x));
    }
    VectorXd p = leaf_point_at(c, z[static_cast<size_t>(n)], role, t_back, opt);
    for (int j = 0; j < n; ++j) p = f.apply(p);
    return x + wrap_sym(p - wrap01(x));
}

namespace {

// oblique projection onto the computed stable bundle along the computed
// unstable bundle at z; kills the unstable component of a separation vector
// before forward iteration can amplify it
VectorXd strip_unstable(const JacobianCocycle& c, const VectorXd& z, const VectorXd& d,
                        const LeafOptions& opt) {
    MatrixXd Bu = invariant_subspace(c, z, Role::U, opt.n_max, opt.frame_tol).basis;
    MatrixXd Bss = invariant_subspace(c, z, Role::SS, opt.n_max, opt.frame_tol).basis;
    MatrixXd Bws = invariant_subspace(c, z, Role::WS, opt.n_max, opt.frame_tol).basis;
    int dd = c.dim();
    MatrixXd B(dd, dd);
    B << Bu, Bss, Bws;
    VectorXd coords = B.partialPivLu().solve(d);
    coords.head(Bu.cols()).setZero();
    return B * coords;
}

} // namespace

double leaf_affine_chart(const JacobianCocycle& c, const VectorXd& x, Role role, const VectorXd& y,
                         double cauchy_tol, int n_max, const LeafOptions& opt) {
    const Perturbation& f = c.perturbation();
    VectorXd z = wrap01(x);
    VectorXd d = wrap_sym(y - z);  // separation tracked on the lift
    VectorXd e = leaf_direction(c, z, role, c.linear_subspace(role).col(0), opt);

    double prod = 1.0;
    double r_prev = e.dot(d);
    std::vector<double> tail;
    double prev_delta = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int j = 0; j < n_max; ++j) {
        VectorXd fz = f.apply_torus(z);
        d = f.apply(z + d) - f.apply(z);
        MatrixXd J = c.jacobian(z);
        VectorXd e_next = leaf_direction(c, fz, role, VectorXd(J * e), opt);
        prod *= e_next.dot(J * e);
        z = fz;
        e = e_next;
        d = strip_unstable(c, z, d, opt);
        double s = e.dot(d);
        double r = s / prod;
        double delta = std::abs(r - r_prev);
        tail.push_back(delta);
        if (delta < cauchy_tol * std::max(1.0, std::abs(r))) return r;
        r_prev = r;
        // once rounding noise overtakes the geometric decay the increments
        // only grow; past values are not recoverable, surface it instead
        growing = (delta > prev_delta) ? growing + 1 : 0;
        prev_delta = delta;
        if (growing >= 4 || std::abs(s) < 1e-13) break;
    }
    std::ostringstream os;
    os << "leaf_affine_chart: no Cauchy convergence at " << cauchy_tol << "; tail:";
    for (size_t i = tail.size() > 6 ? tail.size() - 6 : 0; i < tail.size(); ++i) os << " " << tail[i];
    throw NoConvergenceError(os.str());
}

// ---------------------------------------------------------------- holonomy --

namespace {

struct StableChart {
    // oblique coordinates in the linear stable frame, u projected out
    MatrixXd Cs;       // 2 x d extractor rows (ss, ws)
    VectorXd origin;   // lift reference

    Eigen::Vector2d coords(const VectorXd& p) const {
        VectorXd w = p - origin;
        Eigen::Vector2d out;
        out(0) = Cs.row(0).dot(w);
        out(1) = Cs.row(1).dot(w);
        return out;
    }
};

StableChart make_stable_chart(const JacobianCocycle& c, const VectorXd& origin) {
    const StableSplitting& s = c.linear_split();
    int d = c.dim();
    MatrixXd B(d, d);
    B << s.u, s.ss, s.ws;
    MatrixXd Binv = B.inverse();
    StableChart ch;
    ch.Cs.resize(2, d);
    ch.Cs.row(0) = Binv.row(d - 2);  // ss coordinate (1-d scenarios)
    ch.Cs.row(1) = Binv.row(d - 1);  // ws coordinate
    ch.origin = origin;
    return ch;
}

// quadratic interpolation of b(a) through the three nearest samples
double interp_on_curve(const std::vector<Eigen::Vector2d>& pts, double a) {
    // pts sorted by a-coordinate
    size_t n = pts.size();
    if (n < 3) throw Error("holonomy: transversal curve too short");
    size_t k = 1;
    while (k + 1 < n - 1 && pts[k + 1](0) < a) ++k;
    const auto &p0 = pts[k - 1], &p1 = pts[k], &p2 = pts[k + 1];
    double a0 = p0(0), a1 = p1(0), a2 = p2(0);
    double l0 = (a - a1) * (a - a2) / ((a0 - a1) * (a0 - a2));
    double l1 = (a - a0) * (a - a2) / ((a1 - a0) * (a1 - a2));
    double l2 = (a - a0) * (a - a1) / ((a2 - a0) * (a2 - a1));
    return p0(1) * l0 + p1(1) * l1 + p2(1) * l2;
}

} // namespace

VectorXd holonomy_point(const JacobianCocycle& c, const VectorXd& x, const VectorXd& y_on_ss,
                        const VectorXd& p_on_ws, const LeafOptions& opt) {
    if (c.role_dim(Role::SS) != 1 || c.role_dim(Role::WS) != 1)
        throw Error("holonomy_point: both role bundles must be 1-d");
    VectorXd x0 = wrap01(x);
    VectorXd y = x0 + wrap_sym(y_on_ss - x0);
    VectorXd p = x0 + wrap_sym(p_on_ws - x0);
    StableChart chart = make_stable_chart(c, x0);

    // strong-stable leaf through p, parametrized by its ss coordinate
    std::vector<Eigen::Vector2d> sigma;
    for (double sgn : {-1.0, 1.0}) {
        LeafCurve half = integrate_leaf(c, p, Role::SS, sgn * opt.chart, opt.step, opt);
        for (size_t i = (sgn > 0 ? 1 : 0); i < half.points.size(); ++i)
            sigma.push_back(chart.coords(half.points[i]));
    }
    std::sort(sigma.begin(), sigma.end(),
              [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a(0) < b(0); });

    auto tau = [&](const VectorXd& q) {
        Eigen::Vector2d co = chart.coords(q);
        if (co(0) < sigma.front()(0) || co(0) > sigma.back()(0))
            throw HolonomyOutOfChartError("holonomy_point: left the transversal chart");
        return co(1) - interp_on_curve(sigma, co(0));
    };

    // integrate from `start` along the entering direction by arclength t
    auto walk = [&](const VectorXd& start, const VectorXd& dir_enter, double t) {
        VectorXd q = start;
        VectorXd dwalk = dir_enter;
        double remaining = t;
        while (remaining > 1e-16) {
            double h = std::min(remaining, opt.step);
            q = midpoint_step(c, q, Role::WS, h, dwalk, opt);
            remaining -= h;
        }
        return q;
    };

    // march along the weak leaf of y in both directions; bracket the sign
    // change of tau, then bisect inside the bracketing step
    VectorXd e0 = leaf_direction(c, y, Role::WS, c.linear_subspace(Role::WS).col(0), opt);
    for (double sgn : {1.0, -1.0}) {
        VectorXd q_prev = y;
        VectorXd dwalk = (sgn > 0) ? e0 : VectorXd(-e0);
        double tau_prev = tau(y);
        double t = 0;
        while (t < opt.chart) {
            VectorXd d_enter = dwalk;
            VectorXd q_next;
            double tau_next;
            try {
                q_next = midpoint_step(c, q_prev, Role::WS, opt.step, dwalk, opt);
                tau_next = tau(q_next);
            } catch (const HolonomyOutOfChartError&) {
                break;  // this direction left the chart; try the other one
            }
            if (tau_prev == 0.0 || (tau_prev < 0) != (tau_next < 0)) {
                double lo = 0, hi = opt.step;
                for (int it = 0; it < 60 && (hi - lo) > 1e-10; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double tm = tau(walk(q_prev, d_enter, mid));
                    if ((tm < 0) == (tau_prev < 0))
                        lo = mid;
                    else
                        hi = mid;
                }
                VectorXd qf = walk(q_prev, d_enter, 0.5 * (lo + hi));
                if (std::abs(tau(qf)) > 1e-8)
                    throw Error("holonomy_point: crossing verification failed, |tau| = " +
                                std::to_string(std::abs(tau(qf))));
                return qf;
            }
            q_prev = q_next;
            tau_prev = tau_next;
            t += opt.step;
        }
    }
    throw HolonomyOutOfChartError("holonomy_point: no crossing within the chart");
}

HolonomyFit lifted_holonomy_test(const JacobianCocycle& c, const VectorXd& x,
                                 const VectorXd& y_on_ss, double chart_radius, int n_samples,
                                 bool identity_charts, const LeafOptions& opt) {
    if (n_samples < 8) throw Error("lifted_holonomy_test: need at least 8 samples");
    VectorXd x0 = wrap01(x);
    VectorXd y = x0 + wrap_sym(y_on_ss - x0);
    VectorXd e_x = leaf_direction(c, x0, Role::WS, c.linear_subspace(Role::WS).col(0), opt);
    VectorXd e_y = leaf_direction(c, y, Role::WS, c.linear_subspace(Role::WS).col(0), opt);

    std::vector<std::pair<VectorXd, VectorXd>> samples;
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < n_samples; ++i) {
        double t = chart_radius * (2.0 * (i + 0.5) / n_samples - 1.0);
        if (std::abs(t) < 0.05 * chart_radius) continue;
        VectorXd p = leaf_point_at(c, x0, Role::WS, t, opt);
        VectorXd q = holonomy_point(c, x0, y, p, opt);
        double xi, eta;
        if (identity_charts) {
            xi = e_x.dot(p - x0);
            eta = e_y.dot(q - y);
        } else {
            xi = leaf_affine_chart(c, x0, Role::WS, p, 1e-9, 60, opt);
            eta = leaf_affine_chart(c, y, Role::WS, q, 1e-9, 60, opt);
        }
        pairs.emplace_back(xi, eta);
        Eigen::VectorXd in(1), out(1);
        in << xi;
        out << eta;
        samples.emplace_back(in, out);
    }

    auto wsm = c.role_moduli(Role::WS);
    ChiSpectrum spec1({std::log(wsm.front())}, {1});
    PolyFit fit = fit_poly_map(samples, 3, spec1);

    // best affine map eta ~ a + b xi
    double n = static_cast<double>(pairs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [xi, eta] : pairs) {
        sx += xi;
        sy += eta;
        sxx += xi * xi;
        sxy += xi * eta;
    }
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double a = (sy - b * sx) / n;
    double ss = 0;
    for (auto& [xi, eta] : pairs) {
        double r = eta - (a + b * xi);
        ss += r * r;
    }

    HolonomyFit out{std::move(fit.map), 0, std::sqrt(ss / n), static_cast<int>(pairs.size())};
    out.nonsr_mass = nonsr_mass(out.fit);
    return out;
}

double test_strong_preservation(const ConjugacyField& field, const JacobianCocycle& c,
                                const VectorXd& x, Role role, const std::vector<double>& parameters,
                                const LeafOptions& opt) {
    const StableSplitting& s = c.linear_split();
    int d = c.dim();
    MatrixXd B(d, d);
    B << s.u, s.ss, s.ws;
    MatrixXd Binv = B.inverse();
    int nu = static_cast<int>(s.u.cols());
    int nss = static_cast<int>(s.ss.cols());

    VectorXd x0 = wrap01(x);
    DeltaSplit dx = field.delta(x0);
    double worst = 0;
    for (double t : parameters) {
        VectorXd y = dynamical_leaf_point(c, x0, role, t, opt);
        VectorXd w = wrap_sym(y - x0) + field.delta_point(y) - dx.total;
        // component outside the linear E^ss: strip the oblique ss part
        VectorXd coords = Binv * w;
        VectorXd w_ss = s.ss * coords.segment(nu, nss);
        worst = std::max(worst, (w - w_ss).norm());
    }
    return worst;
}

double joint_integrability_defect(const JacobianCocycle& c, const VectorXd& x, double delta,
                                  const LeafOptions& opt) {
    if (c.role_dim(Role::U) != 1 || c.role_dim(Role::SS) != 1)
        throw Error("joint_integrability_defect: u and ss bundles must be 1-d");
    VectorXd x0 = wrap01(x);
    LeafOptions fine = opt;
    fine.step = std::min(opt.step, delta / 8);
    VectorXd a = leaf_point_at(c, x0, Role::U, delta, fine);
    VectorXd b = leaf_point_at(c, x0, Role::SS, delta, fine);

    auto both_ways = [&](const VectorXd& start, Role role) {
        std::vector<VectorXd> pts;
        for (double sgn : {-1.0, 1.0}) {
            LeafCurve half = integrate_leaf(c, start, role, sgn * std::min(2.5 * delta, opt.chart),
                                            fine.step, fine);
            for (size_t i = (sgn > 0 ? 1 : 0); i < half.points.size(); ++i)
                pts.push_back(half.points[i]);
        }
        return pts;
    };
    std::vector<VectorXd> curve_ss = both_ways(a, Role::SS);
    std::vector<VectorXd> curve_u = both_ways(b, Role::U);

    // minimal distance between the two polylines (segment-segment)
    auto seg_dist = [](const VectorXd& p1, const VectorXd& p2, const VectorXd& q1, const VectorXd& q2) {
        VectorXd d1 = p2 - p1, d2 = q2 - q1, r = p1 - q1;
        double A = d1.dot(d1), B = d1.dot(d2), C = d2.dot(d2), D = d1.dot(r), E = d2.dot(r);
        double det = A * C - B * B;
        double s, t;
        if (det > 1e-18) {
            s = std::clamp((B * E - C * D) / det, 0.0, 1.0);
            t = std::clamp((A * E - B * D) / det, 0.0, 1.0);
        } else {
            s = 0;
            t = std::clamp(E / std::max(C, 1e-18), 0.0, 1.0);
        }
        // refine the clamped coordinate pair once
        t = std::clamp((d2.dot(p1 + s * d1 - q1)) / std::max(C, 1e-18), 0.0, 1.0);
        s = std::clamp((d1.dot(q1 + t * d2 - p1)) / std::max(A, 1e-18), 0.0, 1.0);
        return (p1 + s * d1 - q1 - t * d2).norm();
    };
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < curve_ss.size(); ++i)
        for (size_t j = 0; j + 1 < curve_u.size(); ++j)
            best = std::min(best, seg_dist(curve_ss[i], curve_ss[i + 1], curve_u[j], curve_u[j + 1]));
    return best / (delta * delta);
}

HolderFit holder_exponent(const std::vector<std::pair<double, double>>& scale_increment) {
    std::vector<std::pair<double, double>> logs;
    for (auto& [s, inc] : scale_increment)
        if (s > 0 && inc > 0) logs.emplace_back(std::log(s), std::log(inc));
    if (logs.size() < 4) throw Error("holder_exponent: need at least 4 positive samples");
    auto [mn, mx] = std::minmax_element(logs.begin(), logs.end());
    if (mx->first - mn->first < 2.0 * std::log(10.0))
        throw Error("holder_exponent: scales must span at least two decades");

    double n = static_cast<double>(logs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto& [lx, ly] : logs) {
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) throw Error("holder_exponent: degenerate scales");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (auto& [lx, ly] : logs) {
        double pred = intercept + slope * lx;
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - ybar) * (ly - ybar);
    }
    return {slope, ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot};
}

// -------------------------------------------------------------- normal forms --

TaylorGerm::TaylorGerm(ChiSpectrum spec, GradedPolyMap t) : spectrum(std::move(spec)), taylor(std::move(t)) {
    if (taylor.dim() != spectrum.total_dim()) throw Error("TaylorGerm: dimension mismatch");
    MatrixXd A = taylor.linear_part();
    int l = spectrum.blocks();
    for (int r = 0; r < taylor.dim(); ++r)
        for (int co = 0; co < taylor.dim(); ++co)
            if (spectrum.block_of_coord(r) != spectrum.block_of_coord(co) && std::abs(A(r, co)) > 1e-10)
                throw Error("TaylorGerm: linear part not block-diagonal");
    for (int b = 0; b < l; ++b) {
        int at = spectrum.coord_start(b), nb = spectrum.dims[static_cast<size_t>(b)];
        Eigen::JacobiSVD<MatrixXd> svd(A.block(at, at, nb, nb));
        double lo = std::exp(spectrum.chi[static_cast<size_t>(b)] - spectrum.eps) - 1e-9;
        double hi = std::exp(spectrum.chi[static_cast<size_t>(b)] + spectrum.eps) + 1e-9;
        if (svd.singularValues().minCoeff() < lo || svd.singularValues().maxCoeff() > hi)
            throw Error("TaylorGerm: block " + std::to_string(b) + " violates the (chi,eps) bounds");
    }
}

namespace {

// truncated inverse of Id + psi (psi of degree >= 2) up to degree N
GradedPolyMap invert_near_identity(const GradedPolyMap& psi, int N) {
    const ChiSpectrum& spec = psi.spectrum();
    GradedPolyMap idm = GradedPolyMap::identity(spec);
    GradedPolyMap R = idm;
    for (int it = 0; it < N; ++it) {
        GradedPolyMap pr = psi.compose_with(R, N);
        R = idm - pr;
    }
    return R;
}

} // namespace

NormalFormPair normal_form_fixed_point(const TaylorGerm& germ, int N) {
    const ChiSpectrum& spec = germ.spectrum;
    if (N < 2) throw Error("normal_form_fixed_point: need N >= 2");
    if (!(spec.chi.front() / spec.chi.back() < static_cast<double>(N)))
        throw Error("normal_form_fixed_point: need chi_1/chi_l < N");

    // near-resonance scan through degree N
    int l = spec.blocks();
    {
        std::vector<int> s(static_cast<size_t>(l), 0);
        std::function<void(int, int)> rec = [&](int j, int total) {
            if (j == l) {
                if (total < 1) return;
                double sum = 0;
                for (int k = 0; k < l; ++k) sum += s[static_cast<size_t>(k)] * spec.chi[static_cast<size_t>(k)];
                for (int i = 0; i < l; ++i) {
                    double diff = sum - spec.chi[static_cast<size_t>(i)];
                    if (diff != 0.0 && std::abs(diff) < 2.0 * spec.eps) {
                        std::ostringstream os;
                        os << "normal_form_fixed_point: type (";
                        for (int k = 0; k < l; ++k) os << s[static_cast<size_t>(k)] << (k + 1 < l ? "," : "");
                        os << ") into block " << i << " is within 2 eps of resonance";
                        throw ResonanceAmbiguityError(os.str());
                    }
                }
                return;
            }
            for (int v = 0; v + total <= N; ++v) {
                s[static_cast<size_t>(j)] = v;
                rec(j + 1, total + v);
            }
            s[static_cast<size_t>(j)] = 0;
        };
        rec(0, 0);
    }

    MatrixXd Lam = germ.taylor.linear_part();
    GradedPolyMap LamMap = GradedPolyMap::from_linear(spec, Lam);
    GradedPolyMap P = germ.taylor.truncated(N);
    GradedPolyMap phi = GradedPolyMap::identity(spec);
    int n = spec.total_dim();

    for (int m = 2; m <= N; ++m) {
        GradedPolyMap Gm = P.homogeneous_part(m);
        // collect non-sub-resonance entries grouped by (target block, type)
        struct Key {
            int block;
            std::vector<int> type;
            bool operator<(const Key& o) const { return std::tie(block, type) < std::tie(o.block, o.type); }
        };
        std::map<Key, std::vector<std::pair<int, Exponents>>> groups;  // basis entries
        std::map<Key, std::map<std::pair<int, Exponents>, double>> rhs;
        for (int r = 0; r < n; ++r) {
            int bi = spec.block_of_coord(r);
            for (const auto& [e, coeff] : Gm.component(r)) {
                auto type = type_of_monomial(spec, e);
                if (is_subresonance(spec, bi, type)) continue;
                Key key{bi, type};
                rhs[key][{r, e}] = coeff;
            }
        }
        if (rhs.empty()) continue;

        GradedPolyMap psi(spec);
        for (auto& [key, entries] : rhs) {
            // basis: every coordinate of the block x every monomial of the type
            std::vector<std::pair<int, Exponents>> basis;
            int at = spec.coord_start(key.block), nb = spec.dims[static_cast<size_t>(key.block)];
            std::vector<Exponents> monos;
            {
                Exponents e(static_cast<size_t>(n), 0);
                std::function<void(int)> rec = [&](int blk) {
                    if (blk == l) {
                        monos.push_back(e);
                        return;
                    }
                    int start = spec.coord_start(blk), dim = spec.dims[static_cast<size_t>(blk)];
                    int want = key.type[static_cast<size_t>(blk)];
                    std::function<void(int, int)> put = [&](int cc, int rem) {
                        if (cc == start + dim) {
                            if (rem == 0) rec(blk + 1);
                            return;
                        }
                        for (int v = 0; v <= rem; ++v) {
                            e[static_cast<size_t>(cc)] = v;
                            put(cc + 1, rem - v);
                            e[static_cast<size_t>(cc)] = 0;
                        }
                    };
                    put(start, want);
                };
                rec(0);
            }
            for (int r = at; r < at + nb; ++r)
                for (const auto& mo : monos) basis.emplace_back(r, mo);

            int dim = static_cast<int>(basis.size());
            MatrixXd T(dim, dim);
            for (int col = 0; col < dim; ++col) {
                GradedPolyMap unit(spec);
                unit.set_coeff(basis[static_cast<size_t>(col)].first, basis[static_cast<size_t>(col)].second, 1.0);
                // T(e) = e o Lam - Lam o e, stays within the (block, type) span
                GradedPolyMap Te = unit.compose_with(LamMap, m) - LamMap.compose_with(unit, m);
                for (int row = 0; row < dim; ++row)
                    T(row, col) = Te.coeff(basis[static_cast<size_t>(row)].first,
                                           basis[static_cast<size_t>(row)].second);
            }
            Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
            for (int row = 0; row < dim; ++row) {
                auto it = entries.find(basis[static_cast<size_t>(row)]);
                if (it != entries.end()) g(row) = it->second;
            }
            Eigen::FullPivLU<MatrixXd> lu(T);
            if (!lu.isInvertible())
                throw Error("normal_form_fixed_point: singular coefficient system for a non-resonant type");
            Eigen::VectorXd sol = lu.solve(-g);
            for (int row = 0; row < dim; ++row)
                if (sol(row) != 0.0)
                    psi.add_coeff(basis[static_cast<size_t>(row)].first,
                                  basis[static_cast<size_t>(row)].second, sol(row));
        }

        GradedPolyMap id_psi = GradedPolyMap::identity(spec) + psi;
        GradedPolyMap inv_psi = invert_near_identity(psi, N);
        phi = id_psi.compose_with(phi, N);
        P = id_psi.compose_with(P.compose_with(inv_psi, N), N);
        P.prune(1e-14);
    }

    // the conjugated germ must now be purely sub-resonance
    P.prune(1e-12);
    SubresonancePolyMap nf{GradedPolyMap(P)};

    // conjugation residual through degree N
    GradedPolyMap lhs = phi.compose_with(germ.taylor.truncated(N), N);
    GradedPolyMap rhs_map = nf.poly().compose_with(phi, N);
    GradedPolyMap diff = lhs - rhs_map;
    double worst = 0;
    for (int r = 0; r < n; ++r)
        for (const auto& [e, coeff] : diff.component(r)) worst = std::max(worst, std::abs(coeff));
    if (worst > 1e-10)
        throw Error("normal_form_fixed_point: conjugation residual " + std::to_string(worst));

    return {std::move(phi), std::move(nf)};
}

} // namespace rigidity
