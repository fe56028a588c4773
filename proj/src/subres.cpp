#include "rigidity/subres.hpp"
#include "rigidity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace rigidity {

// ------------------------------------------------------------- ChiSpectrum --

ChiSpectrum::ChiSpectrum(std::vector<double> chi_, std::vector<int> dims_, double eps_, bool exact_)
    : chi(std::move(chi_)), eps(eps_), dims(std::move(dims_)), exact(exact_) {
    if (chi.empty() || chi.size() != dims.size())
        throw Error("ChiSpectrum: chi and dims must be nonempty and equal length");
    for (size_t i = 0; i < chi.size(); ++i) {
        if (chi[i] >= 0) throw Error("ChiSpectrum: exponents must be negative");
        if (i > 0 && chi[i] <= chi[i - 1]) throw Error("ChiSpectrum: exponents must be strictly increasing");
        if (dims[i] < 1) throw Error("ChiSpectrum: block dimensions must be positive");
    }
    if (eps < 0) throw Error("ChiSpectrum: eps must be nonnegative");
}

int ChiSpectrum::total_dim() const { return std::accumulate(dims.begin(), dims.end(), 0); }

int ChiSpectrum::block_of_coord(int c) const {
    int at = 0;
    for (int b = 0; b < blocks(); ++b) {
        at += dims[static_cast<size_t>(b)];
        if (c < at) return b;
    }
    throw Error("ChiSpectrum: coordinate out of range");
}

int ChiSpectrum::coord_start(int block) const {
    int at = 0;
    for (int b = 0; b < block; ++b) at += dims[static_cast<size_t>(b)];
    return at;
}

int ChiSpectrum::degree_bound() const {
    double r = chi.front() / chi.back();
    return static_cast<int>(std::floor(r + (exact ? 0.0 : 1e-9)));
}

double ChiSpectrum::eps0() const {
    // smallest violation margin chi_i - sum s_j chi_j over non-SR types
    double best = std::numeric_limits<double>::infinity();
    int d = degree_bound();
    int l = blocks();
    std::vector<int> s(static_cast<size_t>(l), 0);
    std::function<void(int, int)> rec = [&](int j, int total) {
        if (j == l) {
            if (total < 1) return;
            for (int i = 0; i < l; ++i) {
                double sum = 0;
                for (int k = 0; k < l; ++k) sum += s[static_cast<size_t>(k)] * chi[static_cast<size_t>(k)];
                double margin = chi[static_cast<size_t>(i)] - sum;
                if (margin > tol()) best = std::min(best, margin);
            }
            return;
        }
        for (int v = 0; v + total <= d; ++v) {
            s[static_cast<size_t>(j)] = v;
            rec(j + 1, total + v);
        }
        s[static_cast<size_t>(j)] = 0;
    };
    rec(0, 0);
    if (!std::isfinite(best)) {
        // every type up to d(chi) is sub-resonance; fall back to the spectral gap
        best = -chi.back();
    }
    return best / 4.0;
}

bool is_subresonance(const ChiSpectrum& spec, int block, const std::vector<int>& s) {
    if (block < 0 || block >= spec.blocks()) throw Error("is_subresonance: block out of range");
    if (static_cast<int>(s.size()) != spec.blocks()) throw Error("is_subresonance: bad type length");
    double sum = 0;
    for (int j = 0; j < spec.blocks(); ++j) sum += s[static_cast<size_t>(j)] * spec.chi[static_cast<size_t>(j)];
    return spec.chi[static_cast<size_t>(block)] <= sum + spec.tol();
}

std::vector<HomogeneousType> enumerate_types(const ChiSpectrum& spec, int block) {
    std::vector<HomogeneousType> out;
    int l = spec.blocks();
    int d = spec.degree_bound();
    std::vector<int> s(static_cast<size_t>(l), 0);
    std::function<void(int, int)> rec = [&](int j, int total) {
        if (j == l) {
            if (total >= 1 && is_subresonance(spec, block, s)) out.push_back({block, s});
            return;
        }
        int lo = 0;
        for (int v = lo; v + total <= d; ++v) {
            s[static_cast<size_t>(j)] = v;
            rec(j + 1, total + v);
        }
        s[static_cast<size_t>(j)] = 0;
    };
    rec(0, 0);
    // s_j = 0 for j < block holds automatically for sub-resonance types; keep
    // the enumeration honest by filtering rather than assuming
    std::erase_if(out, [&](const HomogeneousType& t) {
        for (int j = 0; j < t.block; ++j)
            if (t.s[static_cast<size_t>(j)] != 0) return true;
        return false;
    });
    std::sort(out.begin(), out.end(), [](const HomogeneousType& a, const HomogeneousType& b) {
        return a.s < b.s;
    });
    return out;
}

int exponents_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

std::vector<int> type_of_monomial(const ChiSpectrum& spec, const Exponents& e) {
    std::vector<int> s(static_cast<size_t>(spec.blocks()), 0);
    for (int c = 0; c < static_cast<int>(e.size()); ++c)
        s[static_cast<size_t>(spec.block_of_coord(c))] += e[static_cast<size_t>(c)];
    return s;
}

// ----------------------------------------------------------- GradedPolyMap --

GradedPolyMap::GradedPolyMap(ChiSpectrum spec)
    : spec_(std::move(spec)), n_(spec_.total_dim()), comp_(static_cast<size_t>(n_)) {}

GradedPolyMap GradedPolyMap::identity(const ChiSpectrum& spec) {
    GradedPolyMap g(spec);
    for (int c = 0; c < g.n_; ++c) {
        Exponents e(static_cast<size_t>(g.n_), 0);
        e[static_cast<size_t>(c)] = 1;
        g.set_coeff(c, e, 1.0);
    }
    return g;
}

GradedPolyMap GradedPolyMap::from_linear(const ChiSpectrum& spec, const Eigen::MatrixXd& A) {
    GradedPolyMap g(spec);
    if (A.rows() != g.n_ || A.cols() != g.n_) throw Error("from_linear: size mismatch");
    for (int i = 0; i < g.n_; ++i)
        for (int j = 0; j < g.n_; ++j)
            if (A(i, j) != 0.0) {
                Exponents e(static_cast<size_t>(g.n_), 0);
                e[static_cast<size_t>(j)] = 1;
                g.set_coeff(i, e, A(i, j));
            }
    return g;
}

void GradedPolyMap::set_coeff(int coord, const Exponents& e, double c) {
    if (static_cast<int>(e.size()) != n_) throw Error("set_coeff: bad exponent length");
    if (exponents_degree(e) < 1) throw Error("set_coeff: maps fix the origin, degree-0 term rejected");
    if (c == 0.0)
        comp_[static_cast<size_t>(coord)].erase(e);
    else
        comp_[static_cast<size_t>(coord)][e] = c;
}

void GradedPolyMap::add_coeff(int coord, const Exponents& e, double c) {
    set_coeff(coord, e, coeff(coord, e) + c);
}

double GradedPolyMap::coeff(int coord, const Exponents& e) const {
    const auto& m = comp_[static_cast<size_t>(coord)];
    auto it = m.find(e);
    return it == m.end() ? 0.0 : it->second;
}

Eigen::MatrixXd GradedPolyMap::linear_part() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)])
            if (exponents_degree(e) == 1)
                for (int j = 0; j < n_; ++j)
                    if (e[static_cast<size_t>(j)] == 1) A(i, j) = c;
    return A;
}

int GradedPolyMap::degree() const {
    int d = 0;
    for (const auto& m : comp_)
        for (const auto& [e, c] : m) d = std::max(d, exponents_degree(e));
    return d;
}

Eigen::VectorXd GradedPolyMap::eval(const Eigen::VectorXd& t) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)]) {
            double v = c;
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < e[static_cast<size_t>(j)]; ++k) v *= t(j);
            out(i) += v;
        }
    return out;
}

namespace {

using Poly = std::map<Exponents, double>;  // scalar multivariate polynomial

Poly poly_mul(const Poly& a, const Poly& b, int cap) {
    Poly r;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Exponents e(ea.size());
            for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            if (cap >= 0 && exponents_degree(e) > cap) continue;
            r[e] += ca * cb;
        }
    return r;
}

Poly poly_pow(const Poly& a, int k, int cap, int n) {
    Poly r;
    r[Exponents(static_cast<size_t>(n), 0)] = 1.0;
    for (int i = 0; i < k; ++i) r = poly_mul(r, a, cap);
    return r;
}

} // namespace

GradedPolyMap GradedPolyMap::compose_with(const GradedPolyMap& other, int degree_cap) const {
    if (other.n_ != n_) throw Error("compose: dimension mismatch");
    GradedPolyMap out(spec_);
    // components of `other` as scalar polynomials
    std::vector<Poly> q(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) q[static_cast<size_t>(j)] = other.comp_[static_cast<size_t>(j)];

    for (int i = 0; i < n_; ++i) {
        Poly acc;
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)]) {
            Poly term;
            term[Exponents(static_cast<size_t>(n_), 0)] = c;
            for (int j = 0; j < n_; ++j) {
                int k = e[static_cast<size_t>(j)];
                if (k > 0) term = poly_mul(term, poly_pow(q[static_cast<size_t>(j)], k, degree_cap, n_), degree_cap);
            }
            for (const auto& [em, cm] : term) acc[em] += cm;
        }
        for (const auto& [em, cm] : acc) {
            if (exponents_degree(em) < 1) {
                if (std::abs(cm) > 1e-14) throw Error("compose: nonzero constant term appeared");
                continue;
            }
            if (cm != 0.0) out.add_coeff(i, em, cm);
        }
    }
    out.prune(0.0);
    return out;
}

GradedPolyMap GradedPolyMap::homogeneous_part(int m) const {
    GradedPolyMap out(spec_);
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)])
            if (exponents_degree(e) == m) out.set_coeff(i, e, c);
    return out;
}

GradedPolyMap GradedPolyMap::truncated(int degree_cap) const {
    GradedPolyMap out(spec_);
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)])
            if (exponents_degree(e) <= degree_cap) out.set_coeff(i, e, c);
    return out;
}

GradedPolyMap GradedPolyMap::operator+(const GradedPolyMap& o) const {
    GradedPolyMap out = *this;
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : o.comp_[static_cast<size_t>(i)]) out.add_coeff(i, e, c);
    return out;
}

GradedPolyMap GradedPolyMap::operator-(const GradedPolyMap& o) const {
    GradedPolyMap out = *this;
    for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : o.comp_[static_cast<size_t>(i)]) out.add_coeff(i, e, -c);
    return out;
}

double GradedPolyMap::nonsr_mass() const {
    double mass = 0;
    for (int i = 0; i < n_; ++i) {
        int bi = spec_.block_of_coord(i);
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)]) {
            auto s = type_of_monomial(spec_, e);
            if (!is_subresonance(spec_, bi, s)) mass += std::abs(c);
        }
    }
    return mass;
}

void GradedPolyMap::prune(double threshold) {
    for (auto& m : comp_)
        std::erase_if(m, [&](const auto& kv) { return std::abs(kv.second) <= threshold; });
}

bool GradedPolyMap::all_subresonance(double coeff_floor) const {
    for (int i = 0; i < n_; ++i) {
        int bi = spec_.block_of_coord(i);
        for (const auto& [e, c] : comp_[static_cast<size_t>(i)]) {
            if (std::abs(c) <= coeff_floor) continue;
            if (!is_subresonance(spec_, bi, type_of_monomial(spec_, e))) return false;
        }
    }
    return true;
}

// ----------------------------------------------------- SubresonancePolyMap --

SubresonancePolyMap::SubresonancePolyMap(GradedPolyMap g, double coeff_floor) : g_(std::move(g)) {
    for (int i = 0; i < g_.dim(); ++i) {
        int bi = g_.spectrum().block_of_coord(i);
        for (const auto& [e, c] : g_.component(i)) {
            if (std::abs(c) <= coeff_floor) continue;
            auto s = type_of_monomial(g_.spectrum(), e);
            if (!is_subresonance(g_.spectrum(), bi, s)) {
                std::ostringstream os;
                os << "SubresonancePolyMap: non-sub-resonance term of weight " << c
                   << " into block " << bi;
                throw ClosureViolationError(os.str());
            }
        }
    }
    g_.prune(coeff_floor);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g_.linear_part());
    if (!lu.isInvertible())
        throw SingularLinearPartError("SubresonancePolyMap: linear part singular");
    if (g_.degree() > g_.spectrum().degree_bound())
        throw ClosureViolationError("SubresonancePolyMap: degree exceeds d(chi)");
}

SubresonancePolyMap SubresonancePolyMap::identity(const ChiSpectrum& spec) {
    return SubresonancePolyMap(GradedPolyMap::identity(spec));
}

SubresonancePolyMap compose(const SubresonancePolyMap& P, const SubresonancePolyMap& Q) {
    // full expansion, no truncation: closure is asserted, not imposed
    GradedPolyMap g = P.poly().compose_with(Q.poly(), -1);
    return SubresonancePolyMap(std::move(g));
}

SubresonancePolyMap invert(const SubresonancePolyMap& P) {
    const ChiSpectrum& spec = P.spectrum();
    int cap = spec.degree_bound();
    Eigen::MatrixXd A = P.poly().linear_part();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw SingularLinearPartError("invert: singular linear part");
    Eigen::MatrixXd Ainv = lu.inverse();

    GradedPolyMap N = P.poly() - GradedPolyMap::from_linear(spec, A);  // nonlinear tail
    GradedPolyMap AinvMap = GradedPolyMap::from_linear(spec, Ainv);
    // R <- Ainv (id - N(R)) iterated to the degree bound
    GradedPolyMap R = AinvMap;
    for (int it = 0; it < cap; ++it) {
        GradedPolyMap NR = N.compose_with(R, cap);
        GradedPolyMap idm = GradedPolyMap::identity(spec);
        R = AinvMap.compose_with(idm - NR, cap);
    }
    R.prune(1e-15);
    return SubresonancePolyMap(std::move(R));
}

double nonsr_mass(const GradedPolyMap& G) { return G.nonsr_mass(); }

// ------------------------------------------------------------ fit_poly_map --

namespace {

void enumerate_monomials(int n, int degree, std::vector<Exponents>& out) {
    Exponents e(static_cast<size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int j, int rem) {
        if (j == n) {
            if (exponents_degree(e) >= 1) out.push_back(e);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            e[static_cast<size_t>(j)] = v;
            rec(j + 1, rem - v);
        }
        e[static_cast<size_t>(j)] = 0;
    };
    rec(0, degree);
}

} // namespace

PolyFit fit_poly_map(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& samples,
                     int degree, const ChiSpectrum& spec) {
    int n = spec.total_dim();
    std::vector<Exponents> mono;
    enumerate_monomials(n, degree, mono);
    int cols = static_cast<int>(mono.size());
    int rows = static_cast<int>(samples.size());
    if (rows < cols)
        throw IllConditionedFitError("fit_poly_map: fewer samples than monomials",
                                     std::numeric_limits<double>::infinity());

    Eigen::MatrixXd X(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = 1.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < mono[static_cast<size_t>(c)][static_cast<size_t>(j)]; ++k)
                    v *= samples[static_cast<size_t>(r)].first(j);
            X(r, c) = v;
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double cond = svd.singularValues()(0) / svd.singularValues()(cols - 1);
    if (!std::isfinite(cond) || cond > 1e12)
        throw IllConditionedFitError("fit_poly_map: rank-deficient design matrix", cond);

    GradedPolyMap g(spec);
    Eigen::MatrixXd Y(rows, n);
    for (int r = 0; r < rows; ++r) Y.row(r) = samples[static_cast<size_t>(r)].second.transpose();
    Eigen::MatrixXd B = svd.solve(Y);  // cols x n
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < cols; ++c)
            if (B(c, i) != 0.0) g.set_coeff(i, mono[static_cast<size_t>(c)], B(c, i));

    double ss = 0;
    for (int r = 0; r < rows; ++r) {
        Eigen::VectorXd pred = g.eval(samples[static_cast<size_t>(r)].first);
        ss += (pred - samples[static_cast<size_t>(r)].second).squaredNorm();
    }
    double rms = std::sqrt(ss / rows);
    return {std::move(g), rms, cond};
}

} // namespace rigidity
