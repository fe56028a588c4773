#include "rigidity/trig_poly.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

#include <cmath>
#include <sstream>

namespace rigidity {

void TrigPolyMap::add_term(const Eigen::VectorXi& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (k.size() != d_ || a.size() != d_ || b.size() != d_)
        throw Error("TrigPolyMap: term dimension mismatch");
    terms_.push_back({k, a, b});
}

Eigen::VectorXd TrigPolyMap::eval(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
    for (const auto& t : terms_) {
        double phase = 2.0 * M_PI * t.k.cast<double>().dot(x);
        out += t.a * std::cos(phase) + t.b * std::sin(phase);
    }
    return out;
}

Eigen::MatrixXd TrigPolyMap::jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d_, d_);
    for (const auto& t : terms_) {
        double phase = 2.0 * M_PI * t.k.cast<double>().dot(x);
        Eigen::VectorXd dphase = (-t.a * std::sin(phase) + t.b * std::cos(phase));
        J += (2.0 * M_PI) * dphase * t.k.cast<double>().transpose();
    }
    return J;
}

double TrigPolyMap::c0_bound() const {
    Eigen::VectorXd per_comp = Eigen::VectorXd::Zero(d_);
    for (const auto& t : terms_)
        for (int j = 0; j < d_; ++j) per_comp(j) += std::hypot(t.a(j), t.b(j));
    return per_comp.norm();
}

double TrigPolyMap::c1_bound() const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d_, d_);
    for (const auto& t : terms_)
        for (int j = 0; j < d_; ++j)
            for (int m = 0; m < d_; ++m)
                B(j, m) += 2.0 * M_PI * std::abs(static_cast<double>(t.k(m))) * std::hypot(t.a(j), t.b(j));
    return B.norm();  // Frobenius dominates the operator norm
}

Eigen::VectorXd wrap01(const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    for (int i = 0; i < x.size(); ++i) y(i) = x(i) - std::floor(x(i));
    return y;
}

Eigen::VectorXd wrap_sym(const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    for (int i = 0; i < x.size(); ++i) y(i) = x(i) - std::round(x(i));
    return y;
}

double torus_dist(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return wrap_sym(x - y).norm();
}

Perturbation::Perturbation(ToralAutomorphism L, TrigPolyMap v, double smallness_factor,
                           bool skip_smallness_check)
    : L_(std::move(L)), v_(std::move(v)) {
    if (v_.dim() != L_.dim()) throw Error("Perturbation: dimension mismatch");
    Ld_ = L_.matrix_d();
    Linv_ = L_.inverse_d();
    c1_ = v_.c1_bound();

    LyapunovData ld = lyapunov_data(L_);
    double rho_max_s = 0, rho_min_u = std::numeric_limits<double>::infinity();
    for (const auto& c : ld.clusters) {
        if (c.modulus < 1.0) rho_max_s = std::max(rho_max_s, c.modulus);
        if (c.modulus > 1.0) rho_min_u = std::min(rho_min_u, c.modulus);
    }
    if (rho_max_s == 0 || !std::isfinite(rho_min_u))
        throw Error("Perturbation: automorphism must be hyperbolic");
    gap_ = std::min(1.0 - rho_max_s, 1.0 - 1.0 / rho_min_u);
    if (!skip_smallness_check && c1_ > smallness_factor * gap_) {
        std::ostringstream os;
        os << "Perturbation: C1 norm " << c1_ << " exceeds " << smallness_factor
           << " * spectral gap " << gap_;
        throw PerturbationTooLargeError(os.str());
    }
}

Eigen::VectorXd Perturbation::apply(const Eigen::VectorXd& x) const {
    return Ld_ * x + v_.eval(x);
}

Eigen::MatrixXd Perturbation::jacobian(const Eigen::VectorXd& x) const {
    return Ld_ + v_.jacobian(x);
}

Eigen::VectorXd Perturbation::inverse_point(const Eigen::VectorXd& x) const {
    // Lipschitz constant of y -> L^{-1}(x - v(y)): per-term bound
    // 2 pi |k| hypot(|L^{-1}a|, |L^{-1}b|) keeps the gain of perturbation
    // directions aligned with slow eigenvectors
    double lip = 0;
    for (const auto& t : v_.terms())
        lip += 2.0 * M_PI * t.k.cast<double>().norm() *
               std::hypot((Linv_ * t.a).norm(), (Linv_ * t.b).norm());
    if (lip >= 1.0) {
        std::ostringstream os;
        os << "inverse_point: Lipschitz bound " << lip << " >= 1, iteration not a contraction";
        throw PerturbationTooLargeError(os.str());
    }
    Eigen::VectorXd y = Linv_ * x;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd next = Linv_ * (x - v_.eval(y));
        double step = (next - y).norm();
        y = next;
        if (step < 1e-14) break;
    }
    return y;
}

} // namespace rigidity
