#include "rigidity/toral.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/poly_roots.hpp"
#include "rigidity/contraction_ratio_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rigidity {

namespace {

using MpMat = std::vector<std::vector<mpz_class>>;

MpMat to_mp(const IntMatrix& m) {
    int d = static_cast<int>(m.rows());
    MpMat r(static_cast<size_t>(d), std::vector<mpz_class>(static_cast<size_t>(d)));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
    return r;
}

MpMat mp_mul(const MpMat& a, const MpMat& b) {
    size_t d = a.size();
    MpMat r(d, std::vector<mpz_class>(d, 0));
    for (size_t i = 0; i < d; ++i)
        for (size_t k = 0; k < d; ++k) {
            if (a[i][k] == 0) continue;
            for (size_t j = 0; j < d; ++j) r[i][j] += a[i][k] * b[k][j];
        }
    return r;
}

mpz_class mp_trace(const MpMat& a) {
    mpz_class t = 0;
    for (size_t i = 0; i < a.size(); ++i) t += a[i][i];
    return t;
}

} // namespace

IntPoly char_poly(const IntMatrix& m) {
    // Faddeev-LeVerrier; every division is exact over Z
    int d = static_cast<int>(m.rows());
    MpMat A = to_mp(m);
    MpMat N(static_cast<size_t>(d), std::vector<mpz_class>(static_cast<size_t>(d), 0));
    for (int i = 0; i < d; ++i) N[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
    std::vector<mpz_class> c(static_cast<size_t>(d) + 1, 0);
    c[static_cast<size_t>(d)] = 1;
    for (int k = 1; k <= d; ++k) {
        MpMat M = mp_mul(A, N);
        mpz_class t = mp_trace(M);
        mpz_class ck;
        mpz_divexact_ui(ck.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(k));
        ck = -ck;
        c[static_cast<size_t>(d - k)] = ck;
        N = M;
        for (int i = 0; i < d; ++i) N[static_cast<size_t>(i)][static_cast<size_t>(i)] += ck;
    }
    return IntPoly(std::move(c));
}

ToralAutomorphism::ToralAutomorphism(IntMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2)
        throw Error("ToralAutomorphism: need a square matrix of dimension >= 2");
    char_poly_ = rigidity::char_poly(m_);
    mpz_class det = char_poly_.constant();
    if (m_.rows() % 2 == 1) det = -det;  // det(A) = (-1)^d p(0)
    if (det != 1 && det != -1)
        throw Error("ToralAutomorphism: |det| must be 1, got " + det.get_str());

    // Cayley-Hamilton inverse: A^{-1} = -(A^{d-1} + c_{d-1} A^{d-2} + ... + c_1 I)/c_0
    int d = dim();
    MpMat A = to_mp(m_);
    MpMat acc(static_cast<size_t>(d), std::vector<mpz_class>(static_cast<size_t>(d), 0));
    for (int i = 0; i < d; ++i) acc[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;  // A^0
    MpMat sum(static_cast<size_t>(d), std::vector<mpz_class>(static_cast<size_t>(d), 0));
    for (int k = 1; k <= d; ++k) {
        // sum += c_k * A^{k-1}
        const mpz_class& ck = char_poly_[k];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                sum[static_cast<size_t>(i)][static_cast<size_t>(j)] += ck * acc[static_cast<size_t>(i)][static_cast<size_t>(j)];
        if (k < d) acc = mp_mul(A, acc);
    }
    mpz_class c0 = char_poly_.constant();
    inv_.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            mpz_class v = -sum[static_cast<size_t>(i)][static_cast<size_t>(j)] / c0;
            if (!v.fits_slong_p())
                throw Error("ToralAutomorphism: inverse entry exceeds int64 range");
            inv_(i, j) = v.get_si();
        }
}

ToralAutomorphism ToralAutomorphism::companion(const IntPoly& p) {
    if (!p.is_monic() || p.degree() < 2)
        throw Error("companion: need a monic polynomial of degree >= 2");
    int d = p.degree();
    IntMatrix m = IntMatrix::Zero(d, d);
    for (int i = 1; i < d; ++i) m(i, i - 1) = 1;
    for (int i = 0; i < d; ++i) {
        if (!p[i].fits_slong_p()) throw Error("companion: coefficient exceeds int64");
        m(i, d - 1) = -p[i].get_si();
    }
    return ToralAutomorphism(m);
}

ToralAutomorphism ToralAutomorphism::direct_sum(const ToralAutomorphism& other) const {
    int a = dim(), b = other.dim();
    IntMatrix m = IntMatrix::Zero(a + b, a + b);
    m.topLeftCorner(a, a) = m_;
    m.bottomRightCorner(b, b) = other.m_;
    return ToralAutomorphism(m);
}

// ----------------------------------------------------------- lyapunov data --

namespace {

struct RootRecord {
    std::complex<double> z;
    double radius;
    int factor_id;
    int mult;
};

bool close(std::complex<double> a, std::complex<double> b, double r) {
    return std::abs(a - b) <= r;
}

// exact relation q(x) = +- p(-x)
bool negation_related(const IntPoly& p, const IntPoly& q) {
    IntPoly pn = p.negate_argument();
    return q == pn || q == -pn;
}

struct UnionFind {
    std::vector<int> up;
    explicit UnionFind(int n) : up(static_cast<size_t>(n)) { std::iota(up.begin(), up.end(), 0); }
    int find(int i) { return up[static_cast<size_t>(i)] == i ? i : up[static_cast<size_t>(i)] = find(up[static_cast<size_t>(i)]); }
    void unite(int a, int b) { up[static_cast<size_t>(find(a))] = find(b); }
};

} // namespace

int LyapunovData::stable_count() const {
    int n = 0;
    for (const auto& c : clusters) n += (c.modulus < 1.0);
    return n;
}

int LyapunovData::unstable_count() const {
    int n = 0;
    for (const auto& c : clusters) n += (c.modulus > 1.0);
    return n;
}

LyapunovData lyapunov_data(const ToralAutomorphism& L, double tol) {
    LyapunovData out;
    out.dim = L.dim();
    out.factorization = factor_over_Q(L.char_poly());

    std::vector<RootRecord> recs;
    for (int fid = 0; fid < static_cast<int>(out.factorization.size()); ++fid) {
        const auto& [f, mult] = out.factorization[static_cast<size_t>(fid)];
        for (const auto& re : certified_roots(f))
            recs.push_back({re.z, re.radius, fid, mult});
    }

    // certified equality classes of |z|
    int n = static_cast<int>(recs.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto& a = recs[static_cast<size_t>(i)];
            const auto& b = recs[static_cast<size_t>(j)];
            double rr = a.radius + b.radius;
            bool equal = false;
            if (a.factor_id == b.factor_id && close(b.z, std::conj(a.z), rr)) equal = true;
            const IntPoly& fa = out.factorization[static_cast<size_t>(a.factor_id)].first;
            const IntPoly& fb = out.factorization[static_cast<size_t>(b.factor_id)].first;
            if (!equal && negation_related(fa, fb) &&
                (close(b.z, -a.z, rr) || close(b.z, -std::conj(a.z), rr)))
                equal = true;
            if (equal) uf.unite(i, j);
        }

    // class -> aggregated modulus
    std::vector<int> class_of(static_cast<size_t>(n));
    std::vector<int> reps;
    for (int i = 0; i < n; ++i) {
        int r = uf.find(i);
        auto it = std::find(reps.begin(), reps.end(), r);
        if (it == reps.end()) {
            reps.push_back(r);
            class_of[static_cast<size_t>(i)] = static_cast<int>(reps.size()) - 1;
        } else {
            class_of[static_cast<size_t>(i)] = static_cast<int>(it - reps.begin());
        }
    }
    int nc = static_cast<int>(reps.size());
    std::vector<double> cmod(static_cast<size_t>(nc), 0), crad(static_cast<size_t>(nc), 0);
    std::vector<int> ccount(static_cast<size_t>(nc), 0);
    for (int i = 0; i < n; ++i) {
        int c = class_of[static_cast<size_t>(i)];
        cmod[static_cast<size_t>(c)] += std::abs(recs[static_cast<size_t>(i)].z);
        crad[static_cast<size_t>(c)] = std::max(crad[static_cast<size_t>(c)], recs[static_cast<size_t>(i)].radius);
        ccount[static_cast<size_t>(c)] += 1;
    }
    for (int c = 0; c < nc; ++c) cmod[static_cast<size_t>(c)] /= ccount[static_cast<size_t>(c)];

    // distinct classes closer than tol are not provably equal -> surface it
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b) {
            double gap = std::abs(cmod[static_cast<size_t>(a)] - cmod[static_cast<size_t>(b)]);
            if (gap <= std::max(tol, 2.0 * (crad[static_cast<size_t>(a)] + crad[static_cast<size_t>(b)]))) {
                std::ostringstream os;
                os << "lyapunov_data: moduli " << cmod[static_cast<size_t>(a)] << " and "
                   << cmod[static_cast<size_t>(b)] << " within tol " << tol
                   << " but not certifiably equal";
                throw AmbiguousModuliError(os.str());
            }
        }

    // assemble clusters ascending by modulus
    std::vector<int> order(static_cast<size_t>(nc));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cmod[static_cast<size_t>(a)] < cmod[static_cast<size_t>(b)]; });

    Eigen::MatrixXd Ld = L.matrix_d();
    int d = L.dim();

    // real factor list per class: (linear or quadratic, multiplicity)
    struct RealFactor { double b = 0, c = 0; bool quadratic = false; int mult = 1; };
    std::vector<std::vector<RealFactor>> cfac(static_cast<size_t>(nc));
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        const auto& a = recs[static_cast<size_t>(i)];
        int c = class_of[static_cast<size_t>(i)];
        if (a.z.imag() == 0.0) {
            cfac[static_cast<size_t>(c)].push_back({-a.z.real(), 0, false, a.mult});
            used[static_cast<size_t>(i)] = true;
        } else {
            // pair with the conjugate inside the same factor
            int partner = -1;
            for (int j = i + 1; j < n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const auto& b = recs[static_cast<size_t>(j)];
                if (b.factor_id == a.factor_id && close(b.z, std::conj(a.z), a.radius + b.radius)) {
                    partner = j;
                    break;
                }
            }
            if (partner < 0) throw Error("lyapunov_data: unpaired complex root");
            cfac[static_cast<size_t>(c)].push_back({-2.0 * a.z.real(), std::norm(a.z), true, a.mult});
            used[static_cast<size_t>(i)] = used[static_cast<size_t>(partner)] = true;
        }
    }

    auto apply_factor = [&](const Eigen::MatrixXd& M, const RealFactor& rf, int power) {
        Eigen::MatrixXd base = rf.quadratic
            ? Eigen::MatrixXd(Ld * Ld + rf.b * Ld + rf.c * Eigen::MatrixXd::Identity(d, d))
            : Eigen::MatrixXd(Ld + rf.b * Eigen::MatrixXd::Identity(d, d));
        Eigen::MatrixXd R = M;
        for (int k = 0; k < power; ++k) R = R * base;
        return R;
    };

    for (int oi = 0; oi < nc; ++oi) {
        int c = order[static_cast<size_t>(oi)];
        ModulusCluster mc;
        mc.modulus = cmod[static_cast<size_t>(c)];
        mc.radius = crad[static_cast<size_t>(c)];
        for (const auto& rf : cfac[static_cast<size_t>(c)])
            mc.multiplicity += rf.mult * (rf.quadratic ? 2 : 1);
        for (int i = 0; i < n; ++i)
            if (class_of[static_cast<size_t>(i)] == c &&
                std::find(mc.factor_ids.begin(), mc.factor_ids.end(), recs[static_cast<size_t>(i)].factor_id) == mc.factor_ids.end())
                mc.factor_ids.push_back(recs[static_cast<size_t>(i)].factor_id);

        // space = range of the product of the other clusters' annihilators
        Eigen::MatrixXd R = Eigen::MatrixXd::Identity(d, d);
        for (int c2 = 0; c2 < nc; ++c2) {
            if (c2 == c) continue;
            for (const auto& rf : cfac[static_cast<size_t>(c2)]) R = apply_factor(R, rf, rf.mult);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullU);
        const auto& sv = svd.singularValues();
        int m = mc.multiplicity;
        if (m < d) {
            double gap_hi = sv(m - 1) / sv(0);
            double gap_lo = sv(m) / sv(0);
            if (gap_hi < 1e-8 || gap_lo > 1e-8)
                throw Error("lyapunov_data: rank decision for a Lyapunov space failed");
        }
        mc.space = svd.matrixU().leftCols(m);

        // semisimplicity: the squarefree annihilator must kill the space
        Eigen::MatrixXd G = Eigen::MatrixXd::Identity(d, d);
        for (const auto& rf : cfac[static_cast<size_t>(c)]) G = apply_factor(G, rf, 1);
        double defect = (G * mc.space).norm() / std::max(1.0, G.norm());
        mc.jordan_defect = defect > 1e-6;

        out.clusters.push_back(std::move(mc));
    }
    return out;
}

// ------------------------------------------------------------ hyperbolicity --

namespace {

// cyclotomic polynomials with totient <= dmax; the full table is built once
const std::vector<IntPoly>& cyclotomic_table() {
    static const std::vector<IntPoly> table = [] {
        std::vector<IntPoly> phi;  // phi[k-1] = Phi_k
        for (int k = 1; k <= 120; ++k) {
            IntPoly q = IntPoly::monomial(k, 1) - IntPoly::from_int(1);
            for (int dd = 1; dd < k; ++dd)
                if (k % dd == 0) q = q.divide_exact(phi[static_cast<size_t>(dd - 1)]);
            phi.push_back(q);
        }
        return phi;
    }();
    return table;
}

std::vector<IntPoly> cyclotomics_up_to(int dmax) {
    std::vector<IntPoly> out;
    for (const auto& q : cyclotomic_table())
        if (q.degree() <= dmax) out.push_back(q);
    return out;
}

} // namespace

bool is_hyperbolic(const ToralAutomorphism& L, double tol) {
    const IntPoly& p = L.char_poly();
    // exact unit-root screens first
    if (p.eval(1) == 0 || p.eval(-1) == 0) return false;
    for (const auto& cyc : cyclotomics_up_to(p.degree()))
        if (cyc.degree() >= 1 && p.divisible_by(cyc)) return false;

    bool numeric_ok = true, numerically_close = false;
    for (const auto& [f, mult] : p.squarefree_decomposition()) {
        (void)mult;
        for (const auto& re : certified_roots(f)) {
            double gap = std::abs(std::abs(re.z) - 1.0);
            if (gap <= re.radius) numeric_ok = false;
            if (gap <= tol) numerically_close = true;
        }
    }
    if (numeric_ok) return true;
    (void)numerically_close;
    // enclosures touch the circle: the only remaining exact certificate is the
    // absence of reciprocal root pairs
    IntPoly g = IntPoly::gcd(p, p.reversal());
    if (g.degree() == 0) return true;
    throw IndeterminateError("is_hyperbolic: eigenvalue modulus within error bound of 1 and exact checks inconclusive");
}

bool is_irreducible(const ToralAutomorphism& L) {
    auto f = factor_over_Q(L.char_poly());
    return f.size() == 1 && f[0].second == 1;
}

bool is_weakly_irreducible(const ToralAutomorphism& L, double tol) {
    // the criterion compares root-modulus sets ACROSS irreducible factors;
    // modulus coincidences inside one factor are irrelevant, so a single
    // factor (any multiplicity) is weakly irreducible outright
    auto factorization = factor_over_Q(L.char_poly());
    if (factorization.size() <= 1) return true;

    std::vector<std::vector<RootEnclosure>> roots;
    for (const auto& [f, m] : factorization) roots.push_back(certified_roots(f));

    int nf = static_cast<int>(factorization.size());
    for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) {
            if (a == b) continue;
            const IntPoly& fa = factorization[static_cast<size_t>(a)].first;
            const IntPoly& fb = factorization[static_cast<size_t>(b)].first;
            bool neg = negation_related(fa, fb);
            // every modulus of factor a must certifiably appear in factor b
            for (const auto& ra : roots[static_cast<size_t>(a)]) {
                bool matched = false, near_miss = false;
                for (const auto& rb : roots[static_cast<size_t>(b)]) {
                    double gap = std::abs(std::abs(ra.z) - std::abs(rb.z));
                    if (gap > std::max(tol, 2.0 * (ra.radius + rb.radius))) continue;
                    near_miss = true;
                    if (neg && (close(rb.z, -ra.z, ra.radius + rb.radius) ||
                                close(rb.z, -std::conj(ra.z), ra.radius + rb.radius))) {
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    if (near_miss) {
                        std::ostringstream os;
                        os << "is_weakly_irreducible: factors " << fa.str() << " and " << fb.str()
                           << " have moduli within " << tol << " but no exact relation certifies equality";
                        throw AmbiguousModuliError(os.str());
                    }
                    return false;
                }
            }
        }
    }
    return true;
}

// --------------------------------------------------------------- splittings --

StableSplitting stable_splitting(const ToralAutomorphism& L, const SplittingSpec& spec, double tol) {
    LyapunovData ld = lyapunov_data(L, tol);
    std::vector<const ModulusCluster*> stable, unstable;
    for (const auto& c : ld.clusters) {
        if (c.modulus + c.radius < 1.0) stable.push_back(&c);
        else if (c.modulus - c.radius > 1.0) unstable.push_back(&c);
        else throw Error("stable_splitting: eigenvalue modulus not separated from 1");
    }
    int ns = static_cast<int>(stable.size());
    if (spec.ss_count < 1 || spec.ss_count >= ns)
        throw InvalidPartitionError("stable_splitting: ss must take between 1 and " +
                                    std::to_string(ns - 1) + " of the " + std::to_string(ns) +
                                    " stable moduli (requested " + std::to_string(spec.ss_count) + ")");
    StableSplitting out;
    auto hcat = [](const std::vector<const ModulusCluster*>& cs, int from, int to) {
        int cols = 0, rows = 0;
        for (int i = from; i < to; ++i) {
            cols += static_cast<int>(cs[static_cast<size_t>(i)]->space.cols());
            rows = static_cast<int>(cs[static_cast<size_t>(i)]->space.rows());
        }
        Eigen::MatrixXd m(rows, cols);
        int at = 0;
        for (int i = from; i < to; ++i) {
            m.middleCols(at, static_cast<int>(cs[static_cast<size_t>(i)]->space.cols())) = cs[static_cast<size_t>(i)]->space;
            at += static_cast<int>(cs[static_cast<size_t>(i)]->space.cols());
        }
        return la::orthonormalize(m);
    };
    out.ss = hcat(stable, 0, spec.ss_count);
    out.ws = hcat(stable, spec.ss_count, ns);
    out.u = hcat(unstable, 0, static_cast<int>(unstable.size()));
    for (int i = 0; i < ns; ++i)
        (i < spec.ss_count ? out.ss_moduli : out.ws_moduli).push_back(stable[static_cast<size_t>(i)]->modulus);
    for (const auto* c : unstable) out.u_moduli.push_back(c->modulus);

    if (spec.uu_count) {
        int nu = static_cast<int>(unstable.size());
        int k = *spec.uu_count;
        if (k < 1 || k >= nu)
            throw InvalidPartitionError("stable_splitting: uu must take between 1 and " +
                                        std::to_string(nu - 1) + " of the unstable moduli");
        // strongest unstable = largest moduli = last clusters
        out.wu = hcat(unstable, 0, nu - k);
        out.uu = hcat(unstable, nu - k, nu);
    }
    return out;
}

double contraction_ratio(const ToralAutomorphism& L, const SplittingSpec& spec) {
    LyapunovData ld = lyapunov_data(L);
    std::vector<double> stable;
    for (const auto& c : ld.clusters)
        if (c.modulus < 1.0) stable.push_back(c.modulus);
    if (spec.ss_count < 1 || spec.ss_count > static_cast<int>(stable.size()))
        throw InvalidPartitionError("contraction_ratio: empty or oversized ss block");
    std::vector<double> ss(stable.begin(), stable.begin() + spec.ss_count);
    return contraction_ratio_from_moduli(ss);
}

bool is_symplectic(const ToralAutomorphism& L, const IntMatrix& J) {
    int d = L.dim();
    if (d % 2 != 0) throw Error("is_symplectic: dimension must be even");
    if (J.rows() != d || J.cols() != d) throw Error("is_symplectic: form size mismatch");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (J(i, j) != -J(j, i)) throw Error("is_symplectic: form not skew-symmetric");
    IntPoly pj = char_poly(J);
    if (pj.constant() == 0) throw Error("is_symplectic: form not invertible");
    MpMat Lt = to_mp(L.matrix().transpose());
    MpMat Jm = to_mp(J);
    MpMat Lm = to_mp(L.matrix());
    MpMat r = mp_mul(mp_mul(Lt, Jm), Lm);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (r[static_cast<size_t>(i)][static_cast<size_t>(j)] != J(i, j)) return false;
    return true;
}

// ----------------------------------------------------------------- search --

std::string ModulusPattern::str() const {
    std::ostringstream os;
    os << stable << " stable, " << unstable << " unstable";
    if (distinct_stable) os << ", " << *distinct_stable << " distinct stable";
    if (distinct_unstable) os << ", " << *distinct_unstable << " distinct unstable";
    if (real_stable_only) os << ", real stable";
    return os.str();
}

std::vector<ToralAutomorphism> search_companion(int degree, const ModulusPattern& pattern,
                                                int coeff_bound, int degree_cap,
                                                std::size_t max_results) {
    if (degree > degree_cap)
        throw UnsupportedDegreeError("search_companion: degree exceeds cap");
    if (coeff_bound > 20) throw Error("search_companion: coefficient bound capped at 20");
    std::vector<ToralAutomorphism> out;
    std::vector<double> c(static_cast<size_t>(degree) + 1);
    c[static_cast<size_t>(degree)] = 1.0;
    const double margin = 1e-7;

    std::vector<int> idx(static_cast<size_t>(degree) - 1, -coeff_bound);
    for (int sign = -1; sign <= 1; sign += 2) {
        std::fill(idx.begin(), idx.end(), -coeff_bound);
        for (;;) {
            c[0] = sign;
            for (int i = 1; i < degree; ++i) c[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)];

            double p1 = 0, pm1 = 0, powm = 1;
            for (int i = 0; i <= degree; ++i) {
                p1 += c[static_cast<size_t>(i)];
                pm1 += c[static_cast<size_t>(i)] * powm;
                powm = -powm;
            }
            if (p1 != 0.0 && pm1 != 0.0) {
                auto rts = roots_fast(c);
                int st = 0, un = 0;
                bool borderline = false, stable_real = true;
                std::vector<double> stable_m, unstable_m;
                for (auto z : rts) {
                    double m = std::abs(z);
                    if (m < 1.0 - margin) {
                        ++st;
                        stable_m.push_back(m);
                        if (std::abs(z.imag()) > 1e-9) stable_real = false;
                    } else if (m > 1.0 + margin) {
                        ++un;
                        unstable_m.push_back(m);
                    } else {
                        borderline = true;
                    }
                }
                auto distinct = [](std::vector<double> v) {
                    std::sort(v.begin(), v.end());
                    int k = v.empty() ? 0 : 1;
                    for (size_t i = 1; i < v.size(); ++i)
                        if (v[i] - v[i - 1] > 1e-7 * (1.0 + v[i])) ++k;
                    return k;
                };
                bool match = !borderline && st == pattern.stable && un == pattern.unstable &&
                             (!pattern.distinct_stable || distinct(stable_m) == *pattern.distinct_stable) &&
                             (!pattern.distinct_unstable || distinct(unstable_m) == *pattern.distinct_unstable) &&
                             (!pattern.real_stable_only || stable_real);
                if (match) {
                    std::vector<mpz_class> ic(static_cast<size_t>(degree) + 1);
                    for (int i = 0; i <= degree; ++i) ic[static_cast<size_t>(i)] = static_cast<long>(c[static_cast<size_t>(i)]);
                    ToralAutomorphism T = ToralAutomorphism::companion(IntPoly(std::move(ic)));
                    try {
                        if (is_hyperbolic(T)) out.push_back(std::move(T));
                    } catch (const IndeterminateError&) {
                        // skip: cannot certify
                    }
                    if (out.size() >= max_results) return out;
                }
            }

            // odometer over the middle coefficients
            int pos = 0;
            while (pos < degree - 1 && ++idx[static_cast<size_t>(pos)] > coeff_bound) {
                idx[static_cast<size_t>(pos)] = -coeff_bound;
                ++pos;
            }
            if (pos >= degree - 1) break;
        }
    }
    return out;
}

} // namespace rigidity
