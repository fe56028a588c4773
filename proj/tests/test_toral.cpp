#include "doctest.h"

#include "rigidity/contraction_ratio_util.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/poly_roots.hpp"
#include "rigidity/toral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <random>

using namespace rigidity;

namespace {

IntMatrix mat2(long a, long b, long c, long d) {
    IntMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// oracle: moduli of the roots of a monic quadratic x^2 + bx + c via the formula
std::vector<double> quadratic_moduli(double b, double c) {
    double disc = b * b - 4 * c;
    std::vector<double> out;
    if (disc >= 0) {
        out.push_back(std::abs((-b + std::sqrt(disc)) / 2));
        out.push_back(std::abs((-b - std::sqrt(disc)) / 2));
    } else {
        double m = std::sqrt(c);  // |z|^2 = c for a conjugate pair
        out.push_back(m);
        out.push_back(m);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// oracle: real root of p in [lo, hi] by bisection (sign change assumed)
double bisect_root(const IntPoly& p, double lo, double hi) {
    double flo = p.eval_double(lo);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = p.eval_double(mid);
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("char_poly on the spec'd cases") {
    CHECK(char_poly(mat2(2, 1, 1, 1)) == IntPoly::of({1, -3, 1}));
    CHECK(char_poly(mat2(1, 0, 0, 1)) == IntPoly::of({1, -2, 1}));
    IntPoly cubic = IntPoly::of({1, -1, -3, 1});  // x^3 - 3x^2 - x + 1
    CHECK(ToralAutomorphism::companion(cubic).char_poly() == cubic);
    // monic, degree d, constant term +-1
    ToralAutomorphism T = ToralAutomorphism::companion(cubic);
    CHECK(T.char_poly().is_monic());
    CHECK(abs(T.char_poly().constant()) == 1);
}

TEST_CASE("char_poly agrees with a fraction-free determinant oracle") {
    // oracle: det(kI - M) by Bareiss elimination over exact integers
    auto bareiss_det = [](std::vector<std::vector<long>> a) -> long {
        int n = static_cast<int>(a.size());
        long prev = 1, sign = 1;
        for (int k = 0; k < n - 1; ++k) {
            if (a[static_cast<size_t>(k)][static_cast<size_t>(k)] == 0) {
                int swap_row = -1;
                for (int r = k + 1; r < n; ++r)
                    if (a[static_cast<size_t>(r)][static_cast<size_t>(k)] != 0) { swap_row = r; break; }
                if (swap_row < 0) return 0;
                std::swap(a[static_cast<size_t>(k)], a[static_cast<size_t>(swap_row)]);
                sign = -sign;
            }
            for (int i = k + 1; i < n; ++i)
                for (int j = k + 1; j < n; ++j)
                    a[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                        (a[static_cast<size_t>(i)][static_cast<size_t>(j)] * a[static_cast<size_t>(k)][static_cast<size_t>(k)] -
                         a[static_cast<size_t>(i)][static_cast<size_t>(k)] * a[static_cast<size_t>(k)][static_cast<size_t>(j)]) /
                        prev;
            prev = a[static_cast<size_t>(k)][static_cast<size_t>(k)];
        }
        return sign * a[static_cast<size_t>(n) - 1][static_cast<size_t>(n) - 1];
    };

    std::mt19937_64 rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        int d = 2 + static_cast<int>(rng() % 4);
        IntMatrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = static_cast<long>(rng() % 7) - 3;
        IntPoly p = char_poly(m);
        for (long k : {-2L, 0L, 1L, 3L}) {
            std::vector<std::vector<long>> a(static_cast<size_t>(d), std::vector<long>(static_cast<size_t>(d)));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    a[static_cast<size_t>(i)][static_cast<size_t>(j)] = (i == j ? k : 0) - m(i, j);
            CHECK(p.eval(k) == bareiss_det(a));
        }
    }
}

TEST_CASE("integer inverse is exact") {
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    IntMatrix prod = T.matrix() * T.inverse();
    CHECK(prod == IntMatrix(IntMatrix::Identity(2, 2)));
    ToralAutomorphism C = ToralAutomorphism::companion(IntPoly::of({-1, 5, -6, 1}));
    CHECK(IntMatrix(C.matrix() * C.inverse()) == IntMatrix(IntMatrix::Identity(3, 3)));
}

TEST_CASE("determinant precondition") {
    CHECK_THROWS_AS(ToralAutomorphism(mat2(3, 1, 1, 1)), Error);  // det 2
}

TEST_CASE("certified roots of x^2-3x+1 match the quadratic formula") {
    auto roots = certified_roots(IntPoly::of({1, -3, 1}));
    auto oracle = quadratic_moduli(-3, 1);
    REQUIRE(roots.size() == 2);
    CHECK(std::abs(std::abs(roots[0].z) - oracle[0]) < 1e-12);
    CHECK(std::abs(std::abs(roots[1].z) - oracle[1]) < 1e-12);
    CHECK(roots[0].radius < 1e-10);
    CHECK(roots[1].radius < 1e-10);
}

TEST_CASE("lyapunov_data: golden mean matrix") {
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    LyapunovData ld = lyapunov_data(T);
    auto oracle = quadratic_moduli(-3, 1);
    REQUIRE(ld.clusters.size() == 2);
    CHECK(ld.clusters[0].modulus == doctest::Approx(oracle[0]).epsilon(1e-12));
    CHECK(ld.clusters[1].modulus == doctest::Approx(oracle[1]).epsilon(1e-12));
    CHECK(ld.clusters[0].multiplicity == 1);
    CHECK(ld.clusters[1].multiplicity == 1);
    CHECK_FALSE(ld.clusters[0].jordan_defect);
}

TEST_CASE("lyapunov_data: duplicated block doubles multiplicities") {
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    ToralAutomorphism TT = T.direct_sum(T);
    LyapunovData ld = lyapunov_data(TT);
    REQUIRE(ld.clusters.size() == 2);
    CHECK(ld.clusters[0].multiplicity == 2);
    CHECK(ld.clusters[1].multiplicity == 2);
    CHECK(ld.clusters[0].space.cols() == 2);
    CHECK_FALSE(ld.clusters[0].jordan_defect);  // semisimple: two independent blocks
}

TEST_CASE("lyapunov_data: cubic moduli confirmed against bisection oracle") {
    IntPoly cubic = IntPoly::of({1, -1, -3, 1});  // x^3 - 3x^2 - x + 1
    ToralAutomorphism T = ToralAutomorphism::companion(cubic);
    LyapunovData ld = lyapunov_data(T);
    REQUIRE(ld.clusters.size() == 3);
    double r1 = bisect_root(cubic, 0.0, 0.5);      // ~0.46
    double r2 = bisect_root(cubic, -1.0, 0.0);     // ~-0.68
    double r3 = bisect_root(cubic, 3.0, 4.0);      // ~3.21
    CHECK(ld.clusters[0].modulus == doctest::Approx(std::abs(r1)).epsilon(1e-10));
    CHECK(ld.clusters[1].modulus == doctest::Approx(std::abs(r2)).epsilon(1e-10));
    CHECK(ld.clusters[2].modulus == doctest::Approx(std::abs(r3)).epsilon(1e-10));
}

TEST_CASE("lyapunov invariants: spaces invariant, moduli multiply to |det| = 1") {
    for (IntPoly p : {IntPoly::of({1, -1, -3, 1}), IntPoly::of({-1, 5, -6, 1}), IntPoly::of({1, 3, 1})}) {
        ToralAutomorphism T = ToralAutomorphism::companion(p);
        LyapunovData ld = lyapunov_data(T);
        Eigen::MatrixXd Ld = T.matrix_d();
        double prod = 1.0;
        int total = 0;
        for (const auto& c : ld.clusters) {
            total += c.multiplicity;
            prod *= std::pow(c.modulus, c.multiplicity);
            // L-invariance of the space: ||L B - B (B^T L B)|| small
            Eigen::MatrixXd B = c.space;
            Eigen::MatrixXd defect = Ld * B - B * (B.transpose() * Ld * B);
            CHECK(defect.norm() < 1e-9);
        }
        CHECK(total == T.dim());
        CHECK(prod == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("jordan defect detected for a companion of a squared factor") {
    IntPoly q = IntPoly::of({1, -3, 1});
    ToralAutomorphism T = ToralAutomorphism::companion(q * q);
    LyapunovData ld = lyapunov_data(T);
    REQUIRE(ld.clusters.size() == 2);
    CHECK(ld.clusters[0].jordan_defect);
    CHECK(ld.clusters[1].jordan_defect);
    CHECK(ld.clusters[0].multiplicity == 2);
}

TEST_CASE("is_hyperbolic") {
    CHECK(is_hyperbolic(ToralAutomorphism(mat2(2, 1, 1, 1))));
    CHECK_FALSE(is_hyperbolic(ToralAutomorphism(mat2(1, 0, 0, 1))));
    CHECK_FALSE(is_hyperbolic(ToralAutomorphism(mat2(0, -1, 1, 0))));  // rotation, eigenvalues +-i
    CHECK_FALSE(is_hyperbolic(ToralAutomorphism(mat2(1, 1, 0, 1))));   // unipotent shear
}

TEST_CASE("is_irreducible") {
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    CHECK(is_irreducible(T));
    CHECK_FALSE(is_irreducible(T.direct_sum(T)));
    ToralAutomorphism P = ToralAutomorphism::companion(IntPoly::of({1, -3, 1}) * IntPoly::of({-1, -1, 1}));
    CHECK_FALSE(is_irreducible(P));
}

TEST_CASE("weak irreducibility") {
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    CHECK(is_weakly_irreducible(T));  // irreducible, single factor

    // duplicated factor: two factors with identical modulus sets
    CHECK(is_weakly_irreducible(T.direct_sum(T)));

    // negated-argument pair: distinct irreducible factors, same modulus sets;
    // equality must be certified exactly, not guessed
    ToralAutomorphism N = ToralAutomorphism::companion(IntPoly::of({1, 3, 1}));
    CHECK(is_weakly_irreducible(T.direct_sum(N)));

    // product shape of the paper's five-dimensional example: modulus sets differ
    ToralAutomorphism L1 = ToralAutomorphism::companion(IntPoly::of({-1, 5, -6, 1}));
    ToralAutomorphism L2(mat2(2, 1, 1, 1));
    CHECK_FALSE(is_weakly_irreducible(L1.direct_sum(L2)));
}

TEST_CASE("irreducible implies weakly irreducible on search output") {
    auto found = search_companion(4, ModulusPattern{2, 2, {}, {}, false}, 3);
    CHECK(!found.empty());
    int checked = 0;
    for (const auto& T : found) {
        if (is_irreducible(T)) {
            CHECK(is_weakly_irreducible(T));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("stable_splitting dimensions and validation") {
    ToralAutomorphism C3 = ToralAutomorphism::companion(IntPoly::of({1, -1, -3, 1}));
    StableSplitting s = stable_splitting(C3, SplittingSpec{1, {}});
    CHECK(s.ss.cols() == 1);
    CHECK(s.ws.cols() == 1);
    CHECK(s.u.cols() == 1);

    ToralAutomorphism T2(mat2(2, 1, 1, 1));
    CHECK_THROWS_AS(stable_splitting(T2, SplittingSpec{1, {}}), InvalidPartitionError);

    // five-dimensional product: ss = {lambda_ss, mu_s}, ws = {lambda_ws}
    ToralAutomorphism L1 = ToralAutomorphism::companion(IntPoly::of({-1, 5, -6, 1}));
    ToralAutomorphism L = L1.direct_sum(T2);
    StableSplitting s5 = stable_splitting(L, SplittingSpec{2, {}});
    CHECK(s5.ss.cols() == 2);
    CHECK(s5.ws.cols() == 1);
    CHECK(s5.u.cols() == 2);
}

TEST_CASE("contraction ratio") {
    CHECK(contraction_ratio_from_moduli({0.5}) == doctest::Approx(1.0));
    CHECK(contraction_ratio_from_moduli({0.2, 0.5}) == doctest::Approx(std::log(0.2) / std::log(0.5)));
    CHECK(contraction_ratio_from_moduli({0.25, 0.5}) == doctest::Approx(2.0).epsilon(1e-14));

    ToralAutomorphism L1 = ToralAutomorphism::companion(IntPoly::of({-1, 5, -6, 1}));
    ToralAutomorphism L = L1.direct_sum(ToralAutomorphism(mat2(2, 1, 1, 1)));
    LyapunovData ld = lyapunov_data(L);
    double expected = std::log(ld.clusters[0].modulus) / std::log(ld.clusters[1].modulus);
    CHECK(contraction_ratio(L, SplittingSpec{2, {}}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(contraction_ratio(L, SplittingSpec{1, {}}) == doctest::Approx(1.0));
}

TEST_CASE("is_symplectic") {
    IntMatrix J = mat2(0, 1, -1, 0);
    ToralAutomorphism T(mat2(2, 1, 1, 1));
    CHECK(is_symplectic(T, J));

    ToralAutomorphism TT = T.direct_sum(T);
    IntMatrix J4 = IntMatrix::Zero(4, 4);
    J4(0, 1) = 1; J4(1, 0) = -1; J4(2, 3) = 1; J4(3, 2) = -1;
    CHECK(is_symplectic(TT, J4));

    ToralAutomorphism C3 = ToralAutomorphism::companion(IntPoly::of({1, -1, -3, 1}));
    CHECK_THROWS_AS(is_symplectic(C3, IntMatrix(IntMatrix::Zero(3, 3))), Error);  // odd dim
}

TEST_CASE("symplectic four-way splitting") {
    // two SL(2,Z) blocks with distinct moduli preserve the block form
    ToralAutomorphism M = ToralAutomorphism(mat2(2, 1, 1, 1)).direct_sum(ToralAutomorphism(mat2(3, 1, 2, 1)));
    IntMatrix J4 = IntMatrix::Zero(4, 4);
    J4(0, 1) = 1; J4(1, 0) = -1; J4(2, 3) = 1; J4(3, 2) = -1;
    CHECK(is_symplectic(M, J4));

    StableSplitting s = stable_splitting(M, SplittingSpec{1, 1});
    CHECK(s.ss.cols() == 1);
    CHECK(s.ws.cols() == 1);
    CHECK(s.uu.cols() == 1);
    CHECK(s.wu.cols() == 1);
    // uu takes the strongest expansion
    LyapunovData ld = lyapunov_data(M);
    Eigen::MatrixXd Ld = M.matrix_d();
    double stretch_uu = (Ld * s.uu).norm() / s.uu.norm();
    CHECK(stretch_uu == doctest::Approx(ld.clusters[3].modulus).epsilon(1e-9));
    // requesting more uu blocks than available is rejected
    CHECK_THROWS_AS(stable_splitting(M, SplittingSpec{1, 2}), InvalidPartitionError);

    // every returned basis is invariant under L
    for (const Eigen::MatrixXd* B : {&s.ss, &s.ws, &s.u, &s.uu, &s.wu}) {
        Eigen::MatrixXd R = Ld * (*B) - (*B) * ((B->transpose() * (*B)).inverse() * B->transpose() * Ld * (*B));
        CHECK(R.norm() < 1e-9);
    }
}


TEST_CASE("search_companion agrees with an exhaustive quadratic oracle") {
    // oracle: every monic quadratic x^2 + bx + c with c = +-1, |b| <= 3,
    // classified by the quadratic formula
    std::set<std::pair<long, long>> oracle;  // (b, c) with 1 stable 1 unstable
    for (long c : {-1L, 1L})
        for (long b = -3; b <= 3; ++b) {
            auto m = quadratic_moduli(static_cast<double>(b), static_cast<double>(c));
            if (m[0] < 1.0 - 1e-7 && m[1] > 1.0 + 1e-7) oracle.insert({b, c});
        }
    auto found = search_companion(2, ModulusPattern{1, 1, {}, {}, false}, 3);
    std::set<std::pair<long, long>> got;
    for (const auto& T : found) {
        const IntPoly& p = T.char_poly();
        got.insert({p[1].get_si(), p[0].get_si()});
    }
    CHECK(got == oracle);
    // includes x^2 - 3x + 1
    CHECK(got.count({-3, 1}) == 1);

    // degree 2, "2 stable" is impossible with |det| = 1
    CHECK(search_companion(2, ModulusPattern{2, 0, {}, {}, false}, 3).empty());

    // degree 3 with 2 distinct stable moduli: nonempty, verified via lyapunov_data
    auto d3 = search_companion(3, ModulusPattern{2, 1, 2, {}, false}, 3);
    CHECK(!d3.empty());
    for (const auto& T : d3) {
        LyapunovData ld = lyapunov_data(T);
        CHECK(ld.stable_count() == 2);
        CHECK(ld.unstable_count() == 1);
    }
}
