#include "rigidity/conjugacy.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

#include <cmath>
#include <sstream>

namespace rigidity {

ConjugacyField::ConjugacyField(Perturbation f, SplittingSpec spec, double tol, int depth_cap)
    : f_(std::move(f)), split_(stable_splitting(f_.automorphism(), spec)), tol_(tol) {
    int d = f_.dim();
    n_ss_ = static_cast<int>(split_.ss.cols());
    n_ws_ = static_cast<int>(split_.ws.cols());
    n_u_ = static_cast<int>(split_.u.cols());

    Bs_.resize(d, n_ss_ + n_ws_);
    Bs_ << split_.ss, split_.ws;
    Bu_ = split_.u;

    Eigen::MatrixXd B(d, d);
    B << Bu_, Bs_;
    Eigen::MatrixXd Binv = B.inverse();
    Cu_ = Binv.topRows(n_u_);
    Cs_ = Binv.bottomRows(n_ss_ + n_ws_);

    const Eigen::MatrixXd& L = f_.Ld();
    // oblique restrictions: C* are dual rows (C*B = I), so L acts on the
    // coordinates as Cs L Bs; the role spans need not be mutually orthogonal
    Ms_ = Cs_ * L * Bs_;
    Eigen::MatrixXd Mu = Cu_ * L * Bu_;
    Mu_inv_ = Mu.inverse();

    // geometric tail bounds from norms of matrix powers
    double cmax_s = Cs_.norm() * std::max(f_.v().c0_bound(), 1e-300);
    double cmax_u = Cu_.norm() * std::max(f_.v().c0_bound(), 1e-300);
    double bs = la::operator_norm(Bs_), bu = la::operator_norm(Bu_);

    std::vector<double> ns{1.0}, nu{la::operator_norm(Mu_inv_)};
    Eigen::MatrixXd Ps = Eigen::MatrixXd::Identity(n_ss_ + n_ws_, n_ss_ + n_ws_);
    Eigen::MatrixXd Pu = Mu_inv_;
    // extend power-norm tables until the remaining tail is provably tiny
    double rate_s = 0, rate_u = 0;
    for (int k = 0; k < depth_cap + 2; ++k) {
        Ps = Ms_ * Ps;
        Pu = Mu_inv_ * Pu;
        ns.push_back(la::operator_norm(Ps));
        nu.push_back(la::operator_norm(Pu));
        if (ns.back() < 1e-18 && nu.back() < 1e-18) break;
    }
    rate_s = ns.size() > 8 ? std::pow(ns.back() / ns[4], 1.0 / (static_cast<double>(ns.size()) - 5)) : 0.5;
    rate_u = nu.size() > 8 ? std::pow(nu.back() / nu[4], 1.0 / (static_cast<double>(nu.size()) - 5)) : 0.5;
    rate_s = std::min(rate_s, 0.999999);
    rate_u = std::min(rate_u, 0.999999);

    auto tail_from = [&](const std::vector<double>& norms, double rate, double scale, size_t K) {
        // term k of the series carries norms[k-1]; the tail over k > K sums
        // norms[j] for j >= K, with a geometric bound past the table
        double t = 0;
        for (size_t k = K; k < norms.size(); ++k) t += norms[k];
        t += norms.back() * rate / (1.0 - rate);
        return scale * t;
    };

    bool found = false;
    for (int K = 1; K <= depth_cap; ++K) {
        double ts = tail_from(ns, rate_s, bs * cmax_s, static_cast<size_t>(std::min<size_t>(static_cast<size_t>(K), ns.size() - 1)));
        double tu = tail_from(nu, rate_u, bu * cmax_u, static_cast<size_t>(std::min<size_t>(static_cast<size_t>(K), nu.size() - 1)));
        if (std::max(ts, tu) < tol_) {
            K_ = K;
            tail_ = std::max(ts, tu);
            found = true;
            break;
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "ConjugacyField: depth cap " << depth_cap << " hit before tail bound " << tol_
           << "; contraction rates ~ (" << rate_s << ", " << rate_u << ")";
        throw SlowConvergenceError(os.str(), std::max(rate_s, rate_u));
    }
}

// orbit[j] holds f^{j - K_}(x) for j = 0..K_+1 (torus representatives)
std::vector<Eigen::VectorXd> ConjugacyField::backward_orbit(const Eigen::VectorXd& x, int extra) const {
    std::vector<Eigen::VectorXd> orbit(static_cast<size_t>(K_) + 1 + static_cast<size_t>(extra));
    orbit[static_cast<size_t>(K_)] = wrap01(x);
    for (int k = 1; k <= K_; ++k)
        orbit[static_cast<size_t>(K_ - k)] = f_.inverse_torus(orbit[static_cast<size_t>(K_ - k + 1)]);
    for (int j = 1; j <= extra; ++j)
        orbit[static_cast<size_t>(K_ + j)] = f_.apply_torus(orbit[static_cast<size_t>(K_ + j - 1)]);
    return orbit;
}

DeltaSplit ConjugacyField::delta_on_orbit(const std::vector<Eigen::VectorXd>& orbit, int base) const {
    // stable branch: backward samples orbit[base-1], orbit[base-2], ...
    Eigen::VectorXd acc_s = Eigen::VectorXd::Zero(n_ss_ + n_ws_);
    Eigen::MatrixXd Pow = Eigen::MatrixXd::Identity(n_ss_ + n_ws_, n_ss_ + n_ws_);
    for (int k = 1; k <= K_ && base - k >= 0; ++k) {
        acc_s += Pow * (Cs_ * f_.v().eval(orbit[static_cast<size_t>(base - k)]));
        Pow = Ms_ * Pow;
    }

    // unstable branch: forward samples orbit[base], orbit[base+1], ...
    Eigen::VectorXd acc_u = Eigen::VectorXd::Zero(n_u_);
    Eigen::MatrixXd PowU = Mu_inv_;
    Eigen::VectorXd z = orbit[static_cast<size_t>(base)];
    for (int k = 1; k <= K_; ++k) {
        if (base + k - 1 < static_cast<int>(orbit.size()))
            z = orbit[static_cast<size_t>(base + k - 1)];
        else
            z = f_.apply_torus(z);
        acc_u += PowU * (Cu_ * f_.v().eval(z));
        PowU = Mu_inv_ * PowU;
    }

    DeltaSplit out;
    out.u = Bu_ * acc_u;
    out.ss = -split_.ss * acc_s.head(n_ss_);
    out.ws = -split_.ws * acc_s.tail(n_ws_);
    out.total = out.u + out.ss + out.ws;
    return out;
}

DeltaSplit ConjugacyField::delta(const Eigen::VectorXd& x) const {
    return delta_on_orbit(backward_orbit(x, 0), K_);
}

double ConjugacyField::residual_at(const Eigen::VectorXd& x) const {
    // both ends of h(f x) = L h(x) evaluated on one shadowing orbit, so the
    // comparison probes the truncation tail rather than backward-orbit
    // divergence of two independent evaluations
    auto orbit = backward_orbit(x, 1);
    Eigen::VectorXd xw = orbit[static_cast<size_t>(K_)];
    DeltaSplit dx = delta_on_orbit(orbit, K_);
    DeltaSplit dfx = delta_on_orbit(orbit, K_ + 1);
    Eigen::VectorXd fx = f_.apply(xw);
    Eigen::VectorXd lhs = fx + dfx.total;
    Eigen::VectorXd rhs = f_.Ld() * (xw + dx.total);
    return wrap_sym(lhs - rhs).norm();
}

std::pair<double, double> ConjugacyField::residual(const std::vector<Eigen::VectorXd>& xs) const {
    double mx = 0, mean = 0;
    for (const auto& x : xs) {
        double r = residual_at(x);
        mx = std::max(mx, r);
        mean += r;
    }
    if (!xs.empty()) mean /= static_cast<double>(xs.size());
    return {mx, mean};
}

Eigen::VectorXd ConjugacyField::h_inverse(const Eigen::VectorXd& x) const {
    Eigen::VectorXd xw = wrap01(x);
    Eigen::VectorXd y = xw;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd next = xw - delta_point(y);
        double step = torus_dist(next, y);
        y = wrap01(next);
        if (step < 1e-14) break;
    }
    if (torus_dist(y + delta_point(y), xw) > 1e-12)
        throw Error("h_inverse: fixed-point iteration failed to meet 1e-12");
    return y;
}

} // namespace rigidity
