#include "oulab/restriction.hpp"

#include "oulab/operator_core.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace oulab;
using namespace oulab::testing;

namespace {

const std::vector<double> kTimes{0.1, 1.0, 3.0};

}

TEST_CASE("full noise makes the whole space invariant with a_h = A") {
    const Matrix a = randomMatrix(501, 3, 3);
    const OuModel model = makeModel("full", a, Matrix::Identity(3, 3));
    const Restriction r = checkInvariance(model, kTimes);
    CHECK(r.invariant);
    CHECK(r.generator_certified);
    REQUIRE(r.generator.has_value());
    CHECK((*r.generator - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
}

TEST_CASE("the Jordan model noise line is not invariant") {
    const OuModel model = buildPaper2x2();
    // Direct evaluation: S(t)(0,1)^T = e^{-t} (t, 1)^T leaves span{(0,1)}.
    const Matrix s = expm(model.drift, 1.0);
    Vector moved = s * Vector(model.noise_factor.col(0));
    CHECK(moved(0) == doctest::Approx(std::exp(-1.0)));
    const Restriction r = checkInvariance(model, kTimes);
    CHECK_FALSE(r.invariant);
}

TEST_CASE("diagonal models restrict to the diagonal decay generator") {
    const OuModel model = buildDiagonal({1.0, 0.5, 0.25}, {0.5, 1.5, 2.5});
    const Restriction r = checkInvariance(model, kTimes);
    CHECK(r.invariant);
    REQUIRE(r.generator.has_value());
    Eigen::EigenSolver<Matrix> es(*r.generator, /*computeEigenvectors=*/false);
    Vector rates = es.eigenvalues().real();
    std::sort(rates.data(), rates.data() + rates.size());
    CHECK(rates(0) == doctest::Approx(-2.5).epsilon(1e-10));
    CHECK(rates(1) == doctest::Approx(-1.5).epsilon(1e-10));
    CHECK(rates(2) == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(r.contractive);
    CHECK(r.growth_bound == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("intertwining S(t) F = F e^{t a_h} holds on invariant models") {
    for (std::uint64_t seed : {511u, 512u, 513u}) {
        const InvariantModel im = randomInvariantModel(seed, 5, 3, false);
        const Restriction r = checkInvariance(im.model, kTimes);
        REQUIRE(r.invariant);
        REQUIRE(r.generator.has_value());
        const Matrix frame = noiseSpace(im.model).frame();
        const Propagator full(im.model.drift);
        const Propagator restricted(*r.generator);
        for (double t : kTimes) {
            CHECK((full.at(t) * frame - frame * restricted.at(t)).norm() <=
                  1e-8 * frame.norm());
        }
    }
}

TEST_CASE("contraction criterion on the stock examples") {
    CHECK(contractionCriterion(makeModel("iso", -Matrix::Identity(2, 2), Matrix::Identity(2, 2)))
              .contractive);

    const OuModel diagonal = buildDiagonal({1.0, 2.0}, {0.5, 3.0});
    const ContractionTest diag_test = contractionCriterion(diagonal);
    CHECK(diag_test.contractive);
    CHECK(diag_test.witness(0, 0) == doctest::Approx(-0.5));  // -a_1 q_1
    CHECK(diag_test.witness(1, 1) == doctest::Approx(-6.0));  // -a_2 q_2

    Matrix expanding(1, 1), noise(1, 1);
    expanding << 1.0;
    noise << 1.0;
    CHECK_FALSE(contractionCriterion(makeModel("exp", expanding, noise)).contractive);
}

TEST_CASE("matrix-level contraction equivalence on random invariant models") {
    int checked = 0;
    for (std::uint64_t seed = 520; seed < 530; ++seed) {
        const bool contractive_by_construction = seed % 2 == 0;
        const InvariantModel im =
            randomInvariantModel(seed, 5, 3, contractive_by_construction,
                                 !contractive_by_construction);
        const ContractionTest criterion = contractionCriterion(im.model);
        const Restriction r = checkInvariance(im.model, kTimes);
        REQUIRE(r.generator.has_value());
        const Propagator restricted(*r.generator);
        bool contraction_at_samples = true;
        for (double t : {0.001, 0.01, 0.1, 0.5, 1.0, 2.0}) {
            contraction_at_samples =
                contraction_at_samples &&
                restricted.at(t).jacobiSvd().singularValues()(0) <= 1.0 + 1e-8;
        }
        CHECK(criterion.contractive == contraction_at_samples);
        CHECK(criterion.contractive == contractive_by_construction);
        ++checked;
    }
    CHECK(checked == 10);
}

TEST_CASE("scalar regularization estimate matches the closed form") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -1.0;
    i_factor << 1.0;
    const OuModel model = makeModel("scalar", a, i_factor);
    Vector h(1);
    h << 1.0;
    const RegularizationEstimate est = regularizationEstimate(model, 1.0, h);
    const double qt = 0.5 * (1.0 - std::exp(-2.0));
    CHECK(est.ht_norm * est.ht_norm == doctest::Approx(std::exp(-2.0) / qt).epsilon(1e-9));
    CHECK(est.bound == doctest::Approx(qt).epsilon(1e-9));
    CHECK(est.ht_norm * est.ht_norm <= est.bound * (1.0 + 1e-6));
}

TEST_CASE("regularization norm grows like 1/sqrt(t) for small t") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -1.0;
    i_factor << 1.0;
    const OuModel model = makeModel("scalar", a, i_factor);
    Vector h(1);
    h << 1.0;
    const double t = 1e-3;
    const RegularizationEstimate est = regularizationEstimate(model, t, h);
    CHECK(est.ht_norm * std::sqrt(t) == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("regularization of the zero vector is (0, 0)") {
    const InvariantModel im = randomInvariantModel(531, 4, 2, true);
    const RegularizationEstimate est =
        regularizationEstimate(im.model, 0.7, Vector::Zero(4));
    CHECK(est.ht_norm == 0.0);
    CHECK(est.bound == 0.0);
}

TEST_CASE("regularization bound dominates on random invariant models") {
    for (std::uint64_t seed : {541u, 542u, 543u}) {
        const InvariantModel im = randomInvariantModel(seed, 5, 3, false);
        const Vector h = im.model.noise_factor * randomVector(seed + 100, 3);
        for (double t : {0.3, 1.0}) {
            const RegularizationEstimate est = regularizationEstimate(im.model, t, h);
            CHECK(est.ht_norm * est.ht_norm <= est.bound * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("regularization rejects vectors outside the noise space") {
    const InvariantModel im = randomInvariantModel(551, 4, 2, true);
    Eigen::JacobiSVD<Matrix> svd(im.model.noise_factor, Eigen::ComputeFullU);
    const Vector off = svd.matrixU().col(3);
    CHECK_THROWS_AS(regularizationEstimate(im.model, 1.0, off), std::invalid_argument);
}

TEST_CASE("scalar energy identity integrates to the squared noise norm") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -2.0;
    i_factor << std::sqrt(3.0);  // q = 3
    const OuModel model = makeModel("scalar", a, i_factor);
    Vector h(1);
    h << 1.5;
    // The scalar integrand e^{-2 a s} 2a / (q (1 - e^{-2 a t})) integrates to
    // h^2 / q for every horizon.
    for (double t : {0.4, 2.0}) {
        const EnergyIdentity id = normalEnergyIdentity(model, t, h);
        CHECK(id.rhs == doctest::Approx(1.5 * 1.5 / 3.0).epsilon(1e-12));
        CHECK(id.lhs == doctest::Approx(id.rhs).epsilon(1e-7));
    }
}

TEST_CASE("diagonal three-mode energy identity holds to 1e-5") {
    const OuModel model = buildDiagonal({1.0, 0.5, 2.0}, {0.7, 1.3, 2.1});
    Vector h(3);
    h << 1.0, 1.0, 1.0;
    const EnergyIdentity id = normalEnergyIdentity(model, 1.0, h);
    CHECK(std::abs(id.lhs - id.rhs) <= 1e-5 * std::abs(id.rhs));
}

TEST_CASE("energy identity on the zero vector is (0, 0)") {
    const OuModel model = buildDiagonal({1.0, 2.0}, {1.0, 2.0});
    const EnergyIdentity id = normalEnergyIdentity(model, 1.0, Vector::Zero(2));
    CHECK(id.lhs == 0.0);
    CHECK(id.rhs == 0.0);
}

TEST_CASE("non-normal restricted generators are refused with the defect") {
    // Invariant model whose restricted action is a shifted Jordan block.
    Matrix a(2, 2);
    a << -1.0, 5.0, 0.0, -1.0;
    const OuModel model = makeModel("jordan-full-noise", a, Matrix::Identity(2, 2));
    CHECK_THROWS_WITH_AS(normalEnergyIdentity(model, 1.0, Vector::Ones(2)),
                         doctest::Contains("not normal"), std::invalid_argument);
}

TEST_CASE("strong Feller with full noise") {
    const OuModel model = randomStableModel(561, 3, 3);
    const StrongFellerResult r = strongFeller(model, 0.5);
    CHECK(r.holds);
    CHECK(r.kalman_rank == 3);
    REQUIRE(r.maps_into_h.has_value());
    CHECK(*r.maps_into_h);
}

TEST_CASE("the Jordan model is strong Feller although its noise is rank one") {
    const OuModel model = buildPaper2x2();
    // Kalman oracle: [B, AB] = [(0,1)^T, (1,-1)^T] has rank two.
    Matrix ctrl = controllabilityMatrix(model.drift, model.noise_factor);
    CHECK(ctrl(0, 1) == doctest::Approx(1.0));
    CHECK(ctrl(1, 1) == doctest::Approx(-1.0));
    for (double t : {0.1, 1.0}) {
        const StrongFellerResult r = strongFeller(model, t);
        CHECK(r.holds);
        CHECK(r.kalman_rank == 2);
        CHECK_FALSE(r.maps_into_h.has_value());  // H itself is not invariant
    }
}

TEST_CASE("a decoupled noiseless coordinate breaks the strong Feller property") {
    Matrix i_factor(2, 1);
    i_factor << 1.0, 0.0;
    const OuModel model = makeModel("decoupled", -Matrix::Identity(2, 2), i_factor);
    const StrongFellerResult r = strongFeller(model, 1.0);
    CHECK_FALSE(r.holds);
    CHECK(r.kalman_rank == 1);
    CHECK(std::isinf(r.domination));
}

TEST_CASE("Kalman rank equals the Gramian rank at every positive time") {
    for (std::uint64_t seed : {571u, 572u, 573u}) {
        const OuModel model = randomStableModel(seed, 5, 2);
        const int kalman = kalmanRank(model);
        for (double t : {0.2, 1.0}) {
            CHECK(kalman == numericalRank(gramianAt(model, t)));
        }
    }
}
