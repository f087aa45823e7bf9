#include "oulab/rkhs.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace oulab;
using namespace oulab::testing;

TEST_CASE("identity factor gives the Euclidean norm") {
    const RkhsSpace space = RkhsSpace::fromFactor(Matrix::Identity(3, 3));
    const Vector h = randomVector(401, 3);
    CHECK(space.norm(h) == doctest::Approx(h.norm()).epsilon(1e-12));
}

TEST_CASE("the rank-one noise space separates members from non-members") {
    Matrix factor(2, 1);
    factor << 0.0, 1.0;
    const RkhsSpace space = RkhsSpace::fromFactor(factor);
    Vector inside(2), outside(2);
    inside << 0.0, 1.0;
    outside << 1.0, 0.0;
    CHECK(space.norm(inside) == doctest::Approx(1.0));
    CHECK(std::isinf(space.norm(outside)));
}

TEST_CASE("reproducing identity: |Q x|_H^2 = <Q x, x>") {
    const Matrix b = randomMatrix(411, 5, 3);
    const RkhsSpace space = RkhsSpace::fromFactor(b);
    for (int i = 0; i < 20; ++i) {
        const Vector x = randomVector(4100 + static_cast<std::uint64_t>(i), 5);
        const Vector h = space.gram() * x;
        const double direct = space.norm(h);
        CHECK(direct * direct == doctest::Approx(x.dot(space.gram() * x)).epsilon(1e-9));
    }
}

TEST_CASE("membership dichotomy at the tolerance") {
    const Matrix b = randomMatrix(421, 4, 2);
    const RkhsSpace space = RkhsSpace::fromFactor(b);
    const Vector reachable = b * randomVector(422, 2);
    CHECK(std::isfinite(space.norm(reachable)));

    // Add a complement component well above the membership tolerance.
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU);
    const Vector off = svd.matrixU().col(3);
    CHECK(std::isinf(space.norm(reachable + 1e-3 * reachable.norm() * off)));
}

TEST_CASE("gramianSpace of the Jordan model has full Kalman rank") {
    const RkhsSpace ht = gramianSpace(buildPaper2x2(), 1.0);
    CHECK(ht.rank() == 2);
}

TEST_CASE("gramianSpace of a diagonal model uses the closed form") {
    const OuModel model = buildDiagonal({1.0, 4.0}, {1.0, 2.0});
    const RkhsSpace ht = gramianSpace(model, 0.5);
    for (int i = 0; i < 2; ++i) {
        const double a = model.series->a[static_cast<size_t>(i)];
        const double q = model.series->q[static_cast<size_t>(i)];
        const double expected = std::sqrt(q * (1.0 - std::exp(-2.0 * a * 0.5)) / (2.0 * a));
        CHECK(ht.factor()(i, i) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("scalar invariant space has factor sqrt(q / 2a)") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -1.0;
    i_factor << 1.0;
    const OuModel model = makeModel("scalar", a, i_factor);
    const Matrix q_inf = solveLyapunov(model.drift, model.q());
    const RkhsSpace h_inf = invariantSpace(q_inf);
    CHECK(h_inf.factor()(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("time-ordered Gramian spaces include contractively") {
    for (std::uint64_t seed : {431u, 432u}) {
        const OuModel model = randomStableModel(seed, 4, 3);
        const RkhsSpace h_early = gramianSpace(model, 0.4);
        const RkhsSpace h_late = gramianSpace(model, 1.6);
        const InclusionVerdict verdict = inclusion(h_early, h_late);
        CHECK(verdict.included);
        CHECK(verdict.constant <= 1.0 + 1e-10);
    }
}

TEST_CASE("the Jordan model invariant space is not included in its noise space") {
    const OuModel model = buildPaper2x2();
    const Matrix q_inf = solveLyapunov(model.drift, model.q());
    const InclusionVerdict verdict = inclusion(invariantSpace(q_inf), noiseSpace(model));
    CHECK_FALSE(verdict.included);
    CHECK(std::isinf(verdict.constant));
}

TEST_CASE("every Gramian space sits inside the invariant space with constant one") {
    const OuModel model = randomStableModel(441, 5, 5);
    const RkhsSpace h_inf = invariantSpace(solveLyapunov(model.drift, model.q()));
    for (double t : {0.3, 1.0, 3.0}) {
        const InclusionVerdict verdict = inclusion(gramianSpace(model, t), h_inf);
        CHECK(verdict.included);
        CHECK(verdict.constant <= 1.0 + 1e-10);
    }
}

TEST_CASE("inclusion constants compose along nested Gramians") {
    const OuModel model = randomStableModel(451, 4, 4);
    const RkhsSpace h1 = gramianSpace(model, 0.3);
    const RkhsSpace h2 = gramianSpace(model, 0.9);
    const RkhsSpace h3 = gramianSpace(model, 2.7);
    const double m12 = inclusion(h1, h2).constant;
    const double m23 = inclusion(h2, h3).constant;
    const double m13 = inclusion(h1, h3).constant;
    CHECK(m13 <= m12 * m23 + 1e-8);
    CHECK(inclusion(h1, h1).constant == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("equivalent norms of a space with itself are (1, 1)") {
    const RkhsSpace space = RkhsSpace::fromFactor(randomMatrix(461, 4, 4));
    const NormEquivalence eq = equivalentNorms(space, space);
    CHECK(eq.equivalent);
    CHECK(eq.lower == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eq.upper == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("invariant noise spaces keep all Gramian spaces norm-equivalent") {
    // Full noise: H = E is invariant, so H_s = H_t with equivalent norms.
    const OuModel model = randomStableModel(471, 3, 3);
    const NormEquivalence eq = equivalentNorms(gramianSpace(model, 1.0), gramianSpace(model, 2.0));
    CHECK(eq.equivalent);
    CHECK(eq.lower > 0.0);
    CHECK(std::isfinite(eq.upper));
}

TEST_CASE("bounded diagonal rates make H_t equivalent to H for every t") {
    const OuModel model = buildDiagonal(powerLawSequence(1.0, 2.0, 30),
                                        powerLawSequence(1.0, 1.0, 30));
    const RkhsSpace h = noiseSpace(model);
    for (double t : {0.5, 1.0, 4.0}) {
        const NormEquivalence eq = equivalentNorms(gramianSpace(model, t), h);
        CHECK(eq.equivalent);
    }
    // And H_t = H_infinity stays equivalent for all t in this family.
    const InvariantCovariance inv = invariantCovariance(model);
    const NormEquivalence eq_inf =
        equivalentNorms(gramianSpace(model, 1.0), invariantSpace(*inv.q_infinity));
    CHECK(eq_inf.equivalent);
}

TEST_CASE("density verdict is range equality at the rank tolerance") {
    Matrix low(2, 1);
    low << 1.0, 0.0;
    const RkhsSpace sub = RkhsSpace::fromFactor(low);
    const RkhsSpace full = RkhsSpace::fromFactor(Matrix::Identity(2, 2));
    CHECK(inclusion(full, full).dense.value_or(false));
    const InclusionVerdict strict = inclusion(sub, full);
    CHECK(strict.included);
    CHECK_FALSE(strict.dense.has_value());
}
