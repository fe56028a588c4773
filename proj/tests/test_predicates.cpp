#include "doctest.h"

#include "rigidity/errors.hpp"
#include "rigidity/leaves.hpp"

#include <cmath>

using namespace rigidity;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

const IntPoly kCubic = IntPoly::of({-1, 5, -6, 1});

ToralAutomorphism cubic_auto() { return ToralAutomorphism::companion(kCubic); }

Perturbation example_i(double amp) {
    StableSplitting s = stable_splitting(cubic_auto(), SplittingSpec{1, {}});
    TrigPolyMap v(3);
    VectorXi k1(3), k2(3);
    k1 << 1, 0, 0;
    k2 << 1, 0, 1;
    v.add_term(k1, VectorXd::Zero(3), amp * s.u.col(0));
    v.add_term(k2, VectorXd::Zero(3), amp * s.ss.col(0));
    return Perturbation(cubic_auto(), v, 1.0);
}

Perturbation example_ii(double amp) {
    IntMatrix m2(2, 2);
    m2 << 2, 1, 1, 1;
    ToralAutomorphism L = cubic_auto().direct_sum(ToralAutomorphism(m2));
    StableSplitting s3 = stable_splitting(cubic_auto(), SplittingSpec{1, {}});
    VectorXd e_ws5 = VectorXd::Zero(5);
    e_ws5.head(3) = s3.ws.col(0);
    TrigPolyMap v(5);
    VectorXi k(5);
    k << 0, 0, 0, 1, 0;
    v.add_term(k, VectorXd::Zero(5), amp * e_ws5);
    return Perturbation(L, v, 1.0);
}

// perturbation along e_ws: breaks the invariance of the linear u+ss plane
Perturbation weak_direction(double amp) {
    StableSplitting s = stable_splitting(cubic_auto(), SplittingSpec{1, {}});
    TrigPolyMap v(3);
    VectorXi k(3);
    k << 1, 0, 0;
    v.add_term(k, VectorXd::Zero(3), amp * s.ws.col(0));
    return Perturbation(cubic_auto(), v, 1.0);
}

VectorXd pt3(double a, double b, double c) {
    VectorXd x(3);
    x << a, b, c;
    return x;
}

} // namespace

TEST_CASE("strong preservation: holds for the first family, fails for the product") {
    VectorXd x = pt3(0.31, 0.74, 0.52);
    std::vector<double> params = {-5e-3, -1e-3, 1e-3, 5e-3};

    // null perturbation: exactly preserved
    {
        Perturbation lin(cubic_auto(), TrigPolyMap(3), 1.0);
        JacobianCocycle c(lin, SplittingSpec{1, {}});
        ConjugacyField field(lin, SplittingSpec{1, {}}, 1e-12);
        // floor: pullback rounding amplified by (1/lambda_ss)^n
        CHECK(test_strong_preservation(field, c, x, Role::SS, params) < 1e-9);
    }

    // first family: h maps the strong leaves to the linear ones
    {
        Perturbation f = example_i(1e-3);
        JacobianCocycle c(f, SplittingSpec{1, {}});
        ConjugacyField field(f, SplittingSpec{1, {}}, 1e-12);
        CHECK(test_strong_preservation(field, c, x, Role::SS, params) < 1e-8);
    }

    // product family at amplitude 1e-2, sampled along the weakest direction
    // inside the strong bundle where the failure lives
    {
        Perturbation f = example_ii(1e-2);
        JacobianCocycle c(f, SplittingSpec{2, {}});
        ConjugacyField field(f, SplittingSpec{2, {}}, 1e-11);
        VectorXd x5(5);
        x5 << 0.31, 0.74, 0.52, 0.28, 0.66;
        CHECK(c.role_dim(Role::SS_WEAK_SUB) == 1);
        double worst = test_strong_preservation(field, c, x5, Role::SS_WEAK_SUB, {0.05, 0.08});
        CHECK(worst > 1e-4);
    }
}

TEST_CASE("strong preservation transverse component decreases with amplitude") {
    VectorXd x5(5);
    x5 << 0.31, 0.74, 0.52, 0.28, 0.66;
    double prev = 1.0;
    for (double amp : {1e-2, 1e-3, 1e-4}) {
        Perturbation f = example_ii(amp);
        JacobianCocycle c(f, SplittingSpec{2, {}});
        ConjugacyField field(f, SplittingSpec{2, {}}, 1e-11);
        double worst = test_strong_preservation(field, c, x5, Role::SS_WEAK_SUB, {0.05});
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("joint integrability defect: zero, small, and broken") {
    VectorXd x = pt3(0.42, 0.17, 0.86);
    double delta = 0.02;

    Perturbation lin(cubic_auto(), TrigPolyMap(3), 1.0);
    JacobianCocycle clin(lin, SplittingSpec{1, {}});
    CHECK(joint_integrability_defect(clin, x, delta) < 1e-8);

    JacobianCocycle ci(example_i(1e-3), SplittingSpec{1, {}});
    double d_i = joint_integrability_defect(ci, x, delta);
    CHECK(d_i < 1e-5);

    JacobianCocycle cw(weak_direction(1e-2), SplittingSpec{1, {}});
    double d_w = joint_integrability_defect(cw, x, delta);
    CHECK(d_w > 1e-3);
}

TEST_CASE("lifted holonomy: affine in normal-form charts, visibly not in raw arclength") {
    Perturbation f = example_i(1e-3);
    JacobianCocycle c(f, SplittingSpec{1, {}});
    VectorXd x = pt3(0.35, 0.6, 0.15);
    VectorXd y = dynamical_leaf_point(c, x, Role::SS, 0.02);

    HolonomyFit nf = lifted_holonomy_test(c, x, y, 0.02, 8, false);
    CHECK(nf.samples >= 6);
    CHECK(nf.affinity_defect < 1e-6);

    HolonomyFit raw = lifted_holonomy_test(c, x, y, 0.02, 8, true);
    CHECK(raw.affinity_defect >= 10.0 * nf.affinity_defect);
}

TEST_CASE("lifted holonomy defect under mesh refinement: never grows, already at the floor") {
    // the affine fit absorbs the smooth part of the integration error, so the
    // defect sits at the chart/series floor for every admissible step; halving
    // the mesh must not degrade it
    Perturbation f = example_i(1e-3);
    JacobianCocycle c(f, SplittingSpec{1, {}});
    VectorXd x = pt3(0.35, 0.6, 0.15);
    VectorXd y = dynamical_leaf_point(c, x, Role::SS, 0.02);
    double prev = std::numeric_limits<double>::infinity();
    double floor_level = 0;
    for (double st : {6e-3, 3e-3, 1.5e-3}) {
        LeafOptions opt;
        opt.step = st;
        double d = lifted_holonomy_test(c, x, y, 0.03, 8, false, opt).affinity_defect;
        CHECK(d <= 2.5 * std::min(prev, 1.0));
        prev = std::min(prev, d);
        floor_level = d;
    }
    CHECK(floor_level < 1e-6);
}
