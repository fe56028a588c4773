#include "rigidity/int_poly.hpp"
#include "rigidity/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <sstream>

namespace rigidity {

// ---------------------------------------------------------------- IntPoly --

IntPoly::IntPoly(std::vector<mpz_class> coeffs) : c_(std::move(coeffs)) { trim(); }

IntPoly IntPoly::from_int(long v) {
    if (v == 0) return IntPoly();
    return IntPoly({mpz_class(v)});
}

IntPoly IntPoly::monomial(int degree, const mpz_class& c) {
    if (c == 0) return IntPoly();
    std::vector<mpz_class> v(static_cast<size_t>(degree) + 1, 0);
    v.back() = c;
    return IntPoly(std::move(v));
}

IntPoly IntPoly::of(std::initializer_list<long> coeffs) {
    std::vector<mpz_class> v;
    v.reserve(coeffs.size());
    for (long c : coeffs) v.emplace_back(c);
    return IntPoly(std::move(v));
}

void IntPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

const mpz_class& IntPoly::constant() const {
    static const mpz_class zero = 0;
    return c_.empty() ? zero : c_.front();
}

IntPoly IntPoly::operator+(const IntPoly& o) const {
    std::vector<mpz_class> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return IntPoly(std::move(r));
}

IntPoly IntPoly::operator-(const IntPoly& o) const {
    std::vector<mpz_class> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
    return IntPoly(std::move(r));
}

IntPoly IntPoly::operator*(const IntPoly& o) const {
    if (is_zero() || o.is_zero()) return IntPoly();
    std::vector<mpz_class> r(c_.size() + o.c_.size() - 1, 0);
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j)
            r[i + j] += c_[i] * o.c_[j];
    return IntPoly(std::move(r));
}

IntPoly IntPoly::operator-() const {
    std::vector<mpz_class> r(c_);
    for (auto& x : r) x = -x;
    return IntPoly(std::move(r));
}

mpz_class IntPoly::eval(const mpz_class& x) const {
    mpz_class acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double IntPoly::eval_double(double x) const {
    double acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->get_d();
    return acc;
}

IntPoly IntPoly::derivative() const {
    if (c_.size() <= 1) return IntPoly();
    std::vector<mpz_class> r(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * static_cast<long>(i);
    return IntPoly(std::move(r));
}

IntPoly IntPoly::reversal() const {
    std::vector<mpz_class> r(c_.rbegin(), c_.rend());
    return IntPoly(std::move(r));
}

IntPoly IntPoly::negate_argument() const {
    std::vector<mpz_class> r(c_);
    for (size_t i = 1; i < r.size(); i += 2) r[i] = -r[i];
    return IntPoly(std::move(r));
}

mpz_class IntPoly::content() const {
    mpz_class g = 0;
    for (const auto& x : c_) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

IntPoly IntPoly::primitive_part() const {
    if (is_zero()) return IntPoly();
    mpz_class g = content();
    if (leading() < 0) g = -g;
    std::vector<mpz_class> r(c_);
    for (auto& x : r) x /= g;
    return IntPoly(std::move(r));
}

IntPoly IntPoly::divide_exact(const IntPoly& d) const {
    if (d.is_zero()) throw Error("IntPoly: division by zero polynomial");
    if (is_zero()) return IntPoly();
    if (degree() < d.degree()) throw Error("IntPoly: division not exact (degree)");
    std::vector<mpz_class> rem(c_);
    std::vector<mpz_class> q(static_cast<size_t>(degree() - d.degree()) + 1, 0);
    for (int i = degree() - d.degree(); i >= 0; --i) {
        mpz_class& top = rem[static_cast<size_t>(i + d.degree())];
        if (top == 0) continue;
        mpz_class qc, r;
        mpz_tdiv_qr(qc.get_mpz_t(), r.get_mpz_t(), top.get_mpz_t(), d.leading().get_mpz_t());
        if (r != 0) throw Error("IntPoly: division not exact (coefficient)");
        q[static_cast<size_t>(i)] = qc;
        for (int j = 0; j <= d.degree(); ++j)
            rem[static_cast<size_t>(i + j)] -= qc * d[j];
    }
    for (const auto& x : rem)
        if (x != 0) throw Error("IntPoly: division not exact (remainder)");
    return IntPoly(std::move(q));
}

bool IntPoly::divisible_by(const IntPoly& d) const {
    try {
        divide_exact(d);
        return true;
    } catch (const Error&) {
        return false;
    }
}

namespace {

// Sparse pseudo-remainder: repeatedly r <- lc(b)*r - lc(r)*x^(dr-db)*b.
// Equal to the classical prem up to an integer factor, which the primitive
// PRS strips anyway.
IntPoly pseudo_rem(const IntPoly& a, const IntPoly& b) {
    IntPoly r = a;
    const mpz_class& lb = b.leading();
    int db = b.degree();
    while (!r.is_zero() && r.degree() >= db) {
        std::vector<mpz_class> next(r.coeffs());
        mpz_class top = r.leading();
        for (auto& x : next) x *= lb;
        int shift = r.degree() - db;
        for (int j = 0; j <= db; ++j)
            next[static_cast<size_t>(shift + j)] -= top * b[j];
        r = IntPoly(std::move(next));
    }
    return r;
}

} // namespace

IntPoly IntPoly::gcd(const IntPoly& a0, const IntPoly& b0) {
    if (a0.is_zero()) return b0.is_zero() ? IntPoly() : b0.primitive_part();
    if (b0.is_zero()) return a0.primitive_part();
    IntPoly a = a0.primitive_part(), b = b0.primitive_part();
    if (a.degree() < b.degree()) std::swap(a, b);
    // primitive PRS; degrees here are small so content stripping per step is cheap
    while (!b.is_zero()) {
        IntPoly r = pseudo_rem(a, b);
        a = b;
        b = r.is_zero() ? IntPoly() : r.primitive_part();
    }
    return a.primitive_part();
}

std::vector<std::pair<IntPoly, int>> IntPoly::squarefree_decomposition() const {
    std::vector<std::pair<IntPoly, int>> out;
    if (is_zero() || degree() < 1) return out;
    IntPoly f = primitive_part();
    // Yun's algorithm; all divisions exact by Gauss's lemma
    IntPoly fp = f.derivative();
    IntPoly g = gcd(f, fp);
    if (g.degree() == 0) {
        out.emplace_back(f, 1);
        return out;
    }
    // with f primitive and positive-leading, every quotient below is integral
    // and primitive, so the rational recursion specializes verbatim
    IntPoly a = f.divide_exact(g);
    IntPoly b = fp.divide_exact(g);
    IntPoly c = b - a.derivative();
    int i = 1;
    while (a.degree() > 0) {
        IntPoly d = gcd(a, c);
        if (d.degree() > 0) out.emplace_back(d, i);
        IntPoly a_next = a.divide_exact(d);
        IntPoly c_next = c.divide_exact(d) - a_next.derivative();
        a = a_next;
        c = c_next;
        ++i;
    }
    return out;
}

std::string IntPoly::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const mpz_class& c = c_[static_cast<size_t>(i)];
        if (c == 0) continue;
        mpz_class ac = abs(c);
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        if (ac != 1 || i == 0) os << ac.get_str();
        if (i > 0) {
            os << "x";
            if (i > 1) os << "^" << i;
        }
    }
    return os.str();
}

// ------------------------------------------------------ mod-p arithmetic --

namespace {

using u64 = std::uint64_t;

struct Fp {
    u64 p;
    u64 add(u64 a, u64 b) const { u64 s = a + b; return s >= p ? s - p : s; }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p - b; }
    u64 mul(u64 a, u64 b) const { return (unsigned __int128)a * b % p; }
    u64 pow(u64 a, u64 e) const {
        u64 r = 1;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    u64 inv(u64 a) const { return pow(a % p, p - 2); }
};

using FpPoly = std::vector<u64>;  // ascending, trimmed

void fp_trim(FpPoly& a) { while (!a.empty() && a.back() == 0) a.pop_back(); }

int fp_deg(const FpPoly& a) { return static_cast<int>(a.size()) - 1; }

FpPoly fp_mul(const Fp& F, const FpPoly& a, const FpPoly& b) {
    if (a.empty() || b.empty()) return {};
    FpPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    fp_trim(r);
    return r;
}

FpPoly fp_sub(const Fp& F, const FpPoly& a, const FpPoly& b) {
    FpPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] = F.sub(r[i], b[i]);
    fp_trim(r);
    return r;
}

// division with remainder, d must be nonzero
void fp_divmod(const Fp& F, FpPoly a, const FpPoly& d, FpPoly& q, FpPoly& r) {
    q.assign(a.size(), 0);
    u64 dinv = F.inv(d.back());
    while (fp_deg(a) >= fp_deg(d)) {
        int shift = fp_deg(a) - fp_deg(d);
        u64 c = F.mul(a.back(), dinv);
        q[static_cast<size_t>(shift)] = c;
        for (size_t j = 0; j < d.size(); ++j)
            a[static_cast<size_t>(shift) + j] = F.sub(a[static_cast<size_t>(shift) + j], F.mul(c, d[j]));
        fp_trim(a);
        if (a.empty()) break;
    }
    fp_trim(q);
    r = a;
}

FpPoly fp_mod(const Fp& F, const FpPoly& a, const FpPoly& d) {
    FpPoly q, r;
    fp_divmod(F, a, d, q, r);
    return r;
}

FpPoly fp_gcd(const Fp& F, FpPoly a, FpPoly b) {
    while (!b.empty()) {
        FpPoly r = fp_mod(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        u64 inv = F.inv(a.back());
        for (auto& x : a) x = F.mul(x, inv);
    }
    return a;
}

FpPoly fp_powmod(const Fp& F, FpPoly base, mpz_class e, const FpPoly& m) {
    FpPoly r = {1};
    base = fp_mod(F, base, m);
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = fp_mod(F, fp_mul(F, r, base), m);
        base = fp_mod(F, fp_mul(F, base, base), m);
        e >>= 1;
    }
    return r;
}

FpPoly fp_monic(const Fp& F, FpPoly a) {
    if (a.empty()) return a;
    u64 inv = F.inv(a.back());
    for (auto& x : a) x = F.mul(x, inv);
    return a;
}

FpPoly fp_derivative(const Fp& F, const FpPoly& a) {
    if (a.size() <= 1) return {};
    FpPoly r(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i) r[i - 1] = F.mul(a[i], i % F.p);
    fp_trim(r);
    return r;
}

struct SplitRng {
    u64 s = 0x9e3779b97f4a7c15ull;
    u64 next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
};

// Cantor-Zassenhaus equal-degree splitting: H = product of irreducibles of degree d.
void fp_equal_degree(const Fp& F, const FpPoly& H, int d, SplitRng& rng, std::vector<FpPoly>& out) {
    if (fp_deg(H) == d) {
        out.push_back(H);
        return;
    }
    mpz_class q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(F.p), static_cast<unsigned long>(d));
    mpz_class e = (q - 1) / 2;
    for (;;) {
        FpPoly a(static_cast<size_t>(fp_deg(H)), 0);
        for (auto& x : a) x = rng.next() % F.p;
        fp_trim(a);
        if (fp_deg(a) < 1) continue;
        FpPoly b = fp_powmod(F, a, e, H);
        if (b.empty()) continue;
        b[0] = F.sub(b[0], 1);
        fp_trim(b);
        FpPoly g = fp_gcd(F, b, H);
        if (fp_deg(g) > 0 && fp_deg(g) < fp_deg(H)) {
            FpPoly q, r;
            fp_divmod(F, H, g, q, r);
            fp_equal_degree(F, g, d, rng, out);
            fp_equal_degree(F, fp_monic(F, q), d, rng, out);
            return;
        }
    }
}

// full factorization of a squarefree monic polynomial mod p
std::vector<FpPoly> fp_factor_squarefree(const Fp& F, FpPoly f, SplitRng& rng) {
    std::vector<FpPoly> out;
    FpPoly x = {0, 1};
    FpPoly h = x;  // x^(p^d) mod f, iteratively
    int d = 0;
    FpPoly W = f;
    while (fp_deg(W) >= 1) {
        ++d;
        if (2 * d > fp_deg(W)) {
            out.push_back(W);
            break;
        }
        h = fp_powmod(F, h, mpz_class(static_cast<unsigned long>(F.p)), f);
        FpPoly hx = fp_sub(F, fp_mod(F, h, W), fp_mod(F, x, W));
        FpPoly g = fp_gcd(F, hx, W);
        if (fp_deg(g) > 0) {
            fp_equal_degree(F, g, d, rng, out);
            FpPoly q, r;
            fp_divmod(F, W, g, q, r);
            W = fp_monic(F, q);
        }
    }
    // canonical order for determinism
    std::sort(out.begin(), out.end(), [](const FpPoly& a, const FpPoly& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    return out;
}

// ------------------------------------------------------- Hensel lifting --

using MpPoly = std::vector<mpz_class>;  // ascending, modulo m, coeffs in [0, m)

void mp_trim(MpPoly& a) { while (!a.empty() && a.back() == 0) a.pop_back(); }

MpPoly mp_reduce(const IntPoly& p, const mpz_class& m) {
    MpPoly r(p.coeffs().size());
    for (size_t i = 0; i < r.size(); ++i) {
        mpz_mod(r[i].get_mpz_t(), p.coeffs()[i].get_mpz_t(), m.get_mpz_t());
    }
    mp_trim(r);
    return r;
}

MpPoly mp_from_fp(const FpPoly& p) {
    MpPoly r(p.size());
    for (size_t i = 0; i < p.size(); ++i) r[i] = static_cast<unsigned long>(p[i]);
    return r;
}

MpPoly mp_mul(const MpPoly& a, const MpPoly& b, const mpz_class& m) {
    if (a.empty() || b.empty()) return {};
    MpPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    for (auto& x : r) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    mp_trim(r);
    return r;
}

MpPoly mp_add(const MpPoly& a, const MpPoly& b, const mpz_class& m) {
    MpPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    for (auto& x : r) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    mp_trim(r);
    return r;
}

MpPoly mp_sub(const MpPoly& a, const MpPoly& b, const mpz_class& m) {
    MpPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    for (auto& x : r) mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    mp_trim(r);
    return r;
}

// divmod by a monic divisor, coefficients mod m
void mp_divmod_monic(const MpPoly& a0, const MpPoly& d, const mpz_class& m, MpPoly& q, MpPoly& r) {
    MpPoly a(a0);
    q.assign(a.size(), 0);
    while (static_cast<int>(a.size()) - 1 >= static_cast<int>(d.size()) - 1 && !a.empty()) {
        size_t shift = a.size() - d.size();
        mpz_class c = a.back();
        q[shift] = c;
        for (size_t j = 0; j < d.size(); ++j) {
            a[shift + j] -= c * d[j];
            mpz_mod(a[shift + j].get_mpz_t(), a[shift + j].get_mpz_t(), m.get_mpz_t());
        }
        mp_trim(a);
        if (a.empty()) break;
    }
    mp_trim(q);
    r = a;
}

struct HenselPair {
    MpPoly g, h, s, t;  // f = g*h mod m, s*g + t*h = 1 mod m, h monic
};

// one quadratic lifting step: modulus m -> m*m (von zur Gathen & Gerhard, Alg. 15.10)
HenselPair hensel_step(const MpPoly& f, const HenselPair& in, const mpz_class& m) {
    mpz_class m2 = m * m;
    MpPoly g(in.g), h(in.h), s(in.s), t(in.t);
    MpPoly e = mp_sub(f, mp_mul(g, h, m2), m2);
    MpPoly q, r;
    mp_divmod_monic(mp_mul(s, e, m2), h, m2, q, r);
    MpPoly g1 = mp_add(g, mp_add(mp_mul(t, e, m2), mp_mul(q, g, m2), m2), m2);
    MpPoly h1 = mp_add(h, r, m2);
    MpPoly b = mp_sub(mp_add(mp_mul(s, g1, m2), mp_mul(t, h1, m2), m2), MpPoly{1}, m2);
    MpPoly c, d;
    mp_divmod_monic(mp_mul(s, b, m2), h1, m2, c, d);
    MpPoly s1 = mp_sub(s, d, m2);
    MpPoly t1 = mp_sub(mp_sub(t, mp_mul(t, b, m2), m2), mp_mul(c, g1, m2), m2);
    return {g1, h1, s1, t1};
}

// extended gcd in F_p[x]; returns (s, t) with s*a + t*b = 1, assuming gcd = 1
void fp_xgcd(const Fp& F, FpPoly a, FpPoly b, FpPoly& s, FpPoly& t) {
    FpPoly s0 = {1}, s1 = {}, t0 = {}, t1 = {1};
    while (!b.empty()) {
        FpPoly q, r;
        fp_divmod(F, a, b, q, r);
        FpPoly s2 = fp_sub(F, s0, fp_mul(F, q, s1));
        FpPoly t2 = fp_sub(F, t0, fp_mul(F, q, t1));
        a = std::move(b);
        b = std::move(r);
        s0 = std::move(s1); s1 = std::move(s2);
        t0 = std::move(t1); t1 = std::move(t2);
    }
    // a is the gcd, a constant; normalize to 1
    u64 inv = F.inv(a.empty() ? 1 : a[0]);
    for (auto& x : s0) x = F.mul(x, inv);
    for (auto& x : t0) x = F.mul(x, inv);
    s = s0;
    t = t0;
}

// Lift the factorization f = u[0]*...*u[r-1] from mod p to mod target (p^(2^k) >= target).
// u[0] may be non-monic (carries the leading coefficient); u[1..] monic.
// Recursive multifactor lifting over a factor tree.
void hensel_multifactor(const IntPoly& f_int, const Fp& F,
                        std::vector<FpPoly> u, const mpz_class& target,
                        std::vector<MpPoly>& out, mpz_class& modulus) {
    if (u.size() == 1) {
        modulus = F.p;
        while (modulus < target) modulus = modulus * modulus;
        out.push_back(mp_reduce(f_int, modulus));
        return;
    }
    size_t half = u.size() / 2;
    FpPoly A = u[0];
    for (size_t i = 1; i < half; ++i) A = fp_mul(F, A, u[i]);
    FpPoly B = u[half];
    for (size_t i = half + 1; i < u.size(); ++i) B = fp_mul(F, B, u[i]);
    FpPoly s, t;
    fp_xgcd(F, A, B, s, t);

    HenselPair hp{mp_from_fp(A), mp_from_fp(B), mp_from_fp(s), mp_from_fp(t)};
    mpz_class m = F.p;
    MpPoly fmod = mp_reduce(f_int, m);
    while (m < target) {
        mpz_class m2 = m * m;
        fmod = mp_reduce(f_int, m2);
        hp = hensel_step(fmod, hp, m);
        m = m2;
    }
    modulus = m;

    // recurse: reconstruct inner factors of A and B by lifting within each half
    std::vector<FpPoly> ua(u.begin(), u.begin() + static_cast<long>(half));
    std::vector<FpPoly> ub(u.begin() + static_cast<long>(half), u.end());

    auto lift_half = [&](const MpPoly& prod, std::vector<FpPoly>& leaves) {
        // prod is known mod m; treat it as an integer polynomial with symmetric coeffs
        MpPoly p = prod;
        std::vector<mpz_class> coeffs(p.size());
        for (size_t i = 0; i < p.size(); ++i) {
            coeffs[i] = p[i];
            if (coeffs[i] * 2 > m) coeffs[i] -= m;
        }
        IntPoly ip((std::vector<mpz_class>(coeffs)));
        mpz_class sub_mod;
        hensel_multifactor(ip, F, leaves, target, out, sub_mod);
    };
    if (ua.size() == 1) {
        out.push_back(hp.g);
    } else {
        lift_half(hp.g, ua);
    }
    if (ub.size() == 1) {
        out.push_back(hp.h);
    } else {
        lift_half(hp.h, ub);
    }
}

// Mignotte-style bound: coefficients of l*h/lc(h), h | f, are bounded by 2^n * |f|_2.
mpz_class factor_coeff_bound(const IntPoly& f) {
    mpz_class s = 0;
    for (const auto& c : f.coeffs()) s += c * c;
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), s.get_mpz_t());
    root += 1;
    mpz_class b = root << static_cast<unsigned>(f.degree() + 1);
    return b;
}

std::vector<IntPoly> factor_squarefree_primitive(const IntPoly& f) {
    std::vector<IntPoly> out;
    if (f.degree() == 1) {
        out.push_back(f);
        return out;
    }
    static const unsigned long primes[] = {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                                           47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};
    // pick among the first few usable primes the one giving fewest modular factors
    struct Cand { Fp F; std::vector<FpPoly> factors; };
    std::vector<Cand> cands;
    for (unsigned long p : primes) {
        if (cands.size() >= 4) break;
        Fp F{p};
        if (mpz_divisible_ui_p(f.leading().get_mpz_t(), p)) continue;
        FpPoly fp(static_cast<size_t>(f.degree()) + 1);
        for (int i = 0; i <= f.degree(); ++i) {
            mpz_class r;
            mpz_mod_ui(r.get_mpz_t(), f[i].get_mpz_t(), p);
            fp[static_cast<size_t>(i)] = r.get_ui();
        }
        fp_trim(fp);
        FpPoly fmonic = fp_monic(F, fp);
        FpPoly g = fp_gcd(F, fmonic, fp_derivative(F, fmonic));
        if (fp_deg(g) != 0) continue;  // not squarefree mod p
        SplitRng rng;
        cands.push_back({F, fp_factor_squarefree(F, fmonic, rng)});
    }
    if (cands.empty()) throw Error("factor_over_Q: no usable prime found");
    size_t best = 0;
    for (size_t i = 1; i < cands.size(); ++i)
        if (cands[i].factors.size() < cands[best].factors.size()) best = i;
    Fp F = cands[best].F;
    std::vector<FpPoly> modular = cands[best].factors;

    if (modular.size() == 1) {
        out.push_back(f);
        return out;
    }

    // fold the leading coefficient into the first modular factor
    mpz_class lc_mod;
    mpz_mod_ui(lc_mod.get_mpz_t(), f.leading().get_mpz_t(), static_cast<unsigned long>(F.p));
    u64 l = lc_mod.get_ui();
    for (auto& x : modular[0]) x = F.mul(x, l);

    mpz_class bound = factor_coeff_bound(f) * 2 + 1;
    std::vector<MpPoly> lifted;
    mpz_class m;
    hensel_multifactor(f, F, modular, bound, lifted, m);
    // normalize lifted factors to monic mod m (invert leading coefficients)
    for (auto& g : lifted) {
        mpz_class inv;
        if (mpz_invert(inv.get_mpz_t(), g.back().get_mpz_t(), m.get_mpz_t()) == 0)
            throw Error("factor_over_Q: lift normalization failed");
        for (auto& x : g) {
            x *= inv;
            mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
        }
    }
    std::sort(lifted.begin(), lifted.end(), [](const MpPoly& a, const MpPoly& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const mpz_class& x, const mpz_class& y) { return x < y; });
    });

    // subset recombination
    IntPoly rem = f;
    std::vector<MpPoly> pool = lifted;
    auto symmetric = [&](MpPoly p) {
        std::vector<mpz_class> c(p.size());
        for (size_t i = 0; i < p.size(); ++i) {
            c[i] = p[i];
            if (c[i] * 2 > m) c[i] -= m;
        }
        return IntPoly(std::move(c));
    };

    size_t card = 1;
    while (pool.size() > 0 && card <= pool.size()) {
        bool found = false;
        std::vector<size_t> idx(card);
        for (size_t i = 0; i < card; ++i) idx[i] = i;
        for (;;) {
            // candidate = lc(rem) * prod(pool[idx]) mod m, symmetric lift
            MpPoly prod = {1};
            for (size_t i : idx) prod = mp_mul(prod, pool[i], m);
            mpz_class lcr = rem.leading();
            mpz_mod(lcr.get_mpz_t(), lcr.get_mpz_t(), m.get_mpz_t());
            for (auto& x : prod) {
                x *= lcr;
                mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
            }
            IntPoly cand = symmetric(prod).primitive_part();
            if (cand.degree() >= 1 && cand.degree() <= rem.degree() && rem.divisible_by(cand)) {
                out.push_back(cand);
                rem = rem.divide_exact(cand).primitive_part();
                std::vector<MpPoly> next;
                for (size_t i = 0, j = 0; i < pool.size(); ++i) {
                    if (j < idx.size() && idx[j] == i) { ++j; continue; }
                    next.push_back(pool[i]);
                }
                pool = std::move(next);
                found = true;
                break;
            }
            // next subset of the same cardinality
            int pos = static_cast<int>(card) - 1;
            while (pos >= 0 && idx[static_cast<size_t>(pos)] == pool.size() - card + static_cast<size_t>(pos)) --pos;
            if (pos < 0) break;
            ++idx[static_cast<size_t>(pos)];
            for (size_t i = static_cast<size_t>(pos) + 1; i < card; ++i) idx[i] = idx[i - 1] + 1;
        }
        if (!found) ++card;
        if (2 * card > pool.size()) break;
    }
    if (rem.degree() >= 1) out.push_back(rem);
    return out;
}

} // namespace

std::vector<std::pair<IntPoly, int>> factor_over_Q(const IntPoly& p, int degree_cap) {
    if (p.is_zero()) throw Error("factor_over_Q: zero polynomial");
    if (p.degree() > degree_cap)
        throw UnsupportedDegreeError("factor_over_Q: degree " + std::to_string(p.degree()) +
                                     " exceeds cap " + std::to_string(degree_cap));
    std::vector<std::pair<IntPoly, int>> out;
    if (p.degree() == 0) return out;
    for (const auto& [sqfree, mult] : p.squarefree_decomposition())
        for (const auto& irr : factor_squarefree_primitive(sqfree))
            out.emplace_back(irr, mult);
    // canonical order: by degree, then coefficients
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first.degree() != b.first.degree()) return a.first.degree() < b.first.degree();
        for (int i = a.first.degree(); i >= 0; --i)
            if (a.first[i] != b.first[i]) return a.first[i] < b.first[i];
        return a.second < b.second;
    });
    // merge equal factors coming from different squarefree multiplicities
    std::vector<std::pair<IntPoly, int>> merged;
    for (auto& fm : out) {
        if (!merged.empty() && merged.back().first == fm.first)
            merged.back().second += fm.second;
        else
            merged.push_back(fm);
    }
    return merged;
}

} // namespace rigidity
