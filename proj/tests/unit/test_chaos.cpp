#include "oulab/chaos.hpp"

#include "oulab/ou_engine.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace oulab;
using namespace oulab::testing;

namespace {

// Tensorized Gauss-Hermite expectation of f over N(0, I_m); exact for
// polynomials of degree < 2 * nodes per coordinate.
double gaussianQuadratureExpectation(int m, int nodes,
                                     const std::function<double(const Vector&)>& f) {
    const GaussHermiteRule rule = gaussHermite(nodes);
    std::vector<int> idx(static_cast<size_t>(m), 0);
    double total = 0.0;
    while (true) {
        Vector point(m);
        double weight = 1.0;
        for (int j = 0; j < m; ++j) {
            point(j) = rule.nodes(idx[static_cast<size_t>(j)]);
            weight *= rule.weights(idx[static_cast<size_t>(j)]);
        }
        total += weight * f(point);
        int pos = 0;
        while (pos < m && idx[static_cast<size_t>(pos)] == nodes - 1) {
            idx[static_cast<size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == m) break;
        ++idx[static_cast<size_t>(pos)];
    }
    return total;
}

}  // namespace

TEST_CASE("basis enumeration is graded and reproducible") {
    const ChaosBasis basis = ChaosBasis::build(2, 2);
    REQUIRE(basis.size() == 6);
    CHECK(basis.multi_indices[0] == MultiIndex{0, 0});
    CHECK(basis.multi_indices[1] == MultiIndex{1, 0});
    CHECK(basis.multi_indices[2] == MultiIndex{0, 1});
    CHECK(basis.multi_indices[3] == MultiIndex{2, 0});
    CHECK(basis.multi_indices[4] == MultiIndex{1, 1});
    CHECK(basis.multi_indices[5] == MultiIndex{0, 2});
    CHECK(basis.orderDim(2) == 3);
}

TEST_CASE("basis is orthonormal under Gaussian quadrature up to m = 3") {
    for (int m : {1, 2, 3}) {
        const ChaosBasis basis = ChaosBasis::build(m, 3);
        for (int i = 0; i < basis.size(); ++i) {
            for (int j = i; j < basis.size(); ++j) {
                const double inner = gaussianQuadratureExpectation(
                    m, 8, [&](const Vector& xi) {
                        return basis.evaluate(i, xi) * basis.evaluate(j, xi);
                    });
                CHECK(inner == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("basis refuses block dimensions above the cap") {
    CHECK_THROWS_AS(ChaosBasis::build(200, 3), std::invalid_argument);
}

TEST_CASE("whitening an isotropic model gives pure exponential decay") {
    const double rate = 0.8;
    const OuModel model =
        makeModel("iso", -rate * Matrix::Identity(3, 3), 2.0 * Matrix::Identity(3, 3));
    const Whitening w = whiten(model);
    CHECK(w.rank == 3);
    for (double t : {0.5, 2.0}) {
        CHECK((w.map(t) - std::exp(-rate * t) * Matrix::Identity(3, 3)).norm() <= 1e-10);
    }
}

TEST_CASE("whitened Jordan semigroup has the known operator norm") {
    const OuModel model = buildPaper2x2();
    const Whitening w = whiten(model);
    for (double t : {0.3, 1.0, 2.5}) {
        const double expected = std::exp(-t) * (t + std::sqrt(t * t + 1.0));
        CHECK(w.map(t).jacobiSvd().singularValues()(0) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("whitened maps satisfy the semigroup law") {
    const OuModel model = randomStableModel(601, 4, 4);
    const Whitening w = whiten(model);
    CHECK((w.map(0.4) * w.map(1.1) - w.map(1.5)).norm() <= 1e-9);
}

TEST_CASE("gamma of the identity is the identity on every block") {
    const ChaosBasis basis = ChaosBasis::build(2, 3);
    const ChaosOperator op = gammaOperator(Matrix::Identity(2, 2), basis);
    for (int k = 0; k <= 3; ++k) {
        const Matrix& block = op.blocks[static_cast<size_t>(k)];
        CHECK((block - Matrix::Identity(block.rows(), block.cols())).norm() <= 1e-12);
    }
}

TEST_CASE("gamma of a scalar contraction is diag(1, c, c^2, c^3)") {
    const double c = 0.6;
    const ChaosBasis basis = ChaosBasis::build(1, 3);
    const ChaosOperator op = gammaOperator(c * Matrix::Identity(1, 1), basis);
    for (int k = 0; k <= 3; ++k) {
        CHECK(op.blocks[static_cast<size_t>(k)](0, 0) ==
              doctest::Approx(std::pow(c, k)).epsilon(1e-12));
    }
}

TEST_CASE("gamma rejects non-contractions") {
    const ChaosBasis basis = ChaosBasis::build(1, 1);
    CHECK_THROWS_AS(gammaOperator(1.5 * Matrix::Identity(1, 1), basis),
                    std::invalid_argument);
}

TEST_CASE("second quantization is functorial blockwise") {
    const ChaosBasis basis = ChaosBasis::build(3, 3);
    Matrix c1 = randomMatrix(611, 3, 3);
    Matrix c2 = randomMatrix(612, 3, 3);
    c1 *= 0.9 / c1.jacobiSvd().singularValues()(0);
    c2 *= 0.8 / c2.jacobiSvd().singularValues()(0);
    const ChaosOperator g1 = gammaOperator(c1, basis);
    const ChaosOperator g2 = gammaOperator(c2, basis);
    const ChaosOperator g12 = gammaOperator(Matrix(c1 * c2), basis);
    for (int k = 0; k <= 3; ++k) {
        const Matrix product = g1.blocks[static_cast<size_t>(k)] * g2.blocks[static_cast<size_t>(k)];
        CHECK((product - g12.blocks[static_cast<size_t>(k)]).norm() <= 1e-9);
    }
}

TEST_CASE("order-two block matches the Mehler sampling oracle") {
    Matrix m = randomMatrix(621, 2, 2);
    m *= 0.8 / m.jacobiSvd().singularValues()(0);
    const ChaosBasis basis = ChaosBasis::build(2, 2);
    const ChaosOperator op = gammaOperator(m, basis);

    // (Gamma(M) f)(u) = E f(M^T u + sqrt(I - M^T M) xi): sample the kernel and
    // project on the order-two basis functions.
    const Matrix noise_factor = psdSqrt(Matrix::Identity(2, 2) - m.transpose() * m);
    const int offset = basis.order_offset[2];
    const int dim = basis.orderDim(2);
    const int count = 1000000;

    Matrix estimate = Matrix::Zero(dim, dim);
    Matrix second_moment = Matrix::Zero(dim, dim);
    for (int i = 0; i < count; ++i) {
        GaussianStream stream(99, static_cast<std::uint64_t>(i));
        Vector u(2), xi(2);
        u << stream.next(), stream.next();
        xi << stream.next(), stream.next();
        const Vector moved = m.transpose() * u + noise_factor * xi;
        for (int row = 0; row < dim; ++row) {
            const double h_row = basis.evaluate(offset + row, u);
            for (int col = 0; col < dim; ++col) {
                const double value = basis.evaluate(offset + col, moved) * h_row;
                estimate(row, col) += value;
                second_moment(row, col) += value * value;
            }
        }
    }
    estimate /= count;
    for (int row = 0; row < dim; ++row) {
        for (int col = 0; col < dim; ++col) {
            const double variance =
                second_moment(row, col) / count - estimate(row, col) * estimate(row, col);
            const double sigma = std::sqrt(std::max(variance, 0.0) / count);
            CHECK(std::abs(estimate(row, col) - op.blocks[2](row, col)) <= 4.0 * sigma + 1e-6);
        }
    }
}

TEST_CASE("scalar transition chaos is diag(1, e^{-at}, e^{-2at}, e^{-3at})") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -1.3;
    i_factor << 0.7;
    const OuModel model = makeModel("scalar", a, i_factor);
    const ChaosOperator op = transitionChaos(model, 0.9, 3);
    for (int k = 0; k <= 3; ++k) {
        CHECK(op.blocks[static_cast<size_t>(k)](0, 0) ==
              doctest::Approx(std::exp(-1.3 * 0.9 * k)).epsilon(1e-10));
    }
}

TEST_CASE("Jordan model first block norm is e^{-1}(1 + sqrt 2) at t = 1") {
    const ChaosOperator op = transitionChaos(buildPaper2x2(), 1.0, 1);
    CHECK(op.blockOperatorNorm(1) ==
          doctest::Approx(std::exp(-1.0) * (1.0 + std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("chaos blocks are symmetric exactly for Q-symmetric models") {
    for (std::uint64_t seed : {631u, 632u}) {
        const OuModel symmetric = randomQSymmetricModel(seed, 3);
        const ChaosOperator op = transitionChaos(symmetric, 0.8, 3);
        for (const Matrix& block : op.blocks) {
            CHECK((block - block.transpose()).norm() <= 1e-9 * std::max(1.0, block.norm()));
        }
    }
    const OuModel skew = randomStableModel(633, 3, 3);
    REQUIRE_FALSE(checkQSymmetry(skew).is_symmetric);
    const ChaosOperator op = transitionChaos(skew, 0.8, 2);
    bool all_symmetric = true;
    for (const Matrix& block : op.blocks) {
        all_symmetric =
            all_symmetric && (block - block.transpose()).norm() <= 1e-9 * block.norm();
    }
    CHECK_FALSE(all_symmetric);
}

TEST_CASE("every transition block is a contraction") {
    const OuModel model = randomStableModel(641, 3, 2);
    for (double t : {0.3, 1.0, 3.0}) {
        const ChaosOperator op = transitionChaos(model, t, 3);
        for (int k = 0; k <= 3; ++k) {
            CHECK(op.blockOperatorNorm(k) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("chaos action agrees with the exact transition on polynomials") {
    const OuModel model = randomStableModel(651, 2, 2);
    const InvariantCovariance inv = invariantCovariance(model);
    REQUIRE(inv.q_infinity.has_value());
    const Whitening w = whiten(model, *inv.q_infinity);
    REQUIRE(w.rank == 2);

    // f(x) = <x, d> + <x, d>^2 as a function of whitened coordinates.
    const Vector direction = randomVector(652, 2);
    const CylindricalFunction f = CylindricalFunction::polynomial(
        Matrix(direction), {{1.0, {1}}, {1.0, {2}}});
    const Vector pulled = w.backward.transpose() * direction;

    const ChaosBasis basis = ChaosBasis::build(2, 2);
    Vector coeffs(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        coeffs(i) = gaussianQuadratureExpectation(2, 8, [&](const Vector& xi) {
            const double y = pulled.dot(xi);
            return (y + y * y) * basis.evaluate(i, xi);
        });
    }

    const double t = 0.7;
    const ChaosOperator op = transitionChaos(model, t, 2);
    const Vector moved = op.apply(coeffs);

    const Vector x = *inv.q_infinity * randomVector(653, 2);  // a state in range(Q_inf)
    const Vector xi_x = w.forward * x;
    double chaos_value = 0.0;
    for (int i = 0; i < basis.size(); ++i) {
        chaos_value += moved(i) * basis.evaluate(i, xi_x);
    }
    const Complex direct = transitionApply(model, f, x, t).value;
    CHECK(chaos_value == doctest::Approx(direct.real()).epsilon(1e-8));
    CHECK(std::abs(direct.imag()) <= 1e-12);
}

TEST_CASE("generator spectrum of a scalar model is {0, -a, ..., -Ka}") {
    Matrix a(1, 1), i_factor(1, 1);
    a << -0.9;
    i_factor << 1.0;
    const OuModel model = makeModel("scalar", a, i_factor);
    const std::vector<Complex> spectrum = generatorSpectrumChaos(model, 3);
    REQUIRE(spectrum.size() == 4);
    for (int k = 0; k <= 3; ++k) {
        CHECK(spectrum[static_cast<size_t>(k)].real() == doctest::Approx(-0.9 * k).epsilon(1e-10));
        CHECK(std::abs(spectrum[static_cast<size_t>(k)].imag()) <= 1e-12);
    }
}

TEST_CASE("generator spectrum of diag(-1, -2) follows the sum rule with gap 1") {
    const OuModel model = buildDiagonal({1.0, 1.0}, {1.0, 2.0});
    std::vector<Complex> spectrum = generatorSpectrumChaos(model, 2);
    std::vector<double> reals;
    for (Complex z : spectrum) {
        reals.push_back(z.real());
        CHECK(std::abs(z.imag()) <= 1e-12);
    }
    std::sort(reals.begin(), reals.end());
    const std::vector<double> expected{-4.0, -3.0, -2.0, -2.0, -1.0, 0.0};
    REQUIRE(reals.size() == expected.size());
    for (size_t i = 0; i < expected.size(); ++i) {
        CHECK(reals[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
    // Gap = distance from 0 to the rest = 1 = -growth bound.
    std::sort(reals.begin(), reals.end(), std::greater<>());
    CHECK(reals[0] == doctest::Approx(0.0));
    CHECK(reals[1] == doctest::Approx(-1.0));
}

TEST_CASE("analytic spectrum route matches the differenced chaos generator") {
    const OuModel model = randomStableModel(661, 3, 3);
    bool fallback = false;
    const std::vector<Complex> analytic = generatorSpectrumChaos(model, 2, Tolerances::defaults(), &fallback);
    REQUIRE_FALSE(fallback);

    const Whitening w = whiten(model);
    const ChaosBasis basis = ChaosBasis::build(w.rank, 2);
    const double h = 1e-5;
    const ChaosOperator gamma_h = gammaOperator(w.map(h).transpose(), basis);
    const ChaosOperator gamma_2h = gammaOperator(w.map(2.0 * h).transpose(), basis);

    std::vector<Complex> numeric;
    for (int k = 0; k <= 2; ++k) {
        const Matrix& block_h = gamma_h.blocks[static_cast<size_t>(k)];
        const Matrix& block_2h = gamma_2h.blocks[static_cast<size_t>(k)];
        const Matrix identity = Matrix::Identity(block_h.rows(), block_h.cols());
        // Richardson-extrapolated forward difference of the block semigroup.
        const Matrix derivative = 2.0 * (block_h - identity) / h - (block_2h - identity) / (2.0 * h);
        Eigen::EigenSolver<Matrix> es(derivative, /*computeEigenvectors=*/false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            numeric.push_back(es.eigenvalues()(i));
        }
    }
    const auto order = [](Complex lhs, Complex rhs) {
        return lhs.real() != rhs.real() ? lhs.real() < rhs.real() : lhs.imag() < rhs.imag();
    };
    std::vector<Complex> analytic_sorted = analytic;
    std::sort(analytic_sorted.begin(), analytic_sorted.end(), order);
    std::sort(numeric.begin(), numeric.end(), order);
    REQUIRE(analytic_sorted.size() == numeric.size());
    for (size_t i = 0; i < numeric.size(); ++i) {
        CHECK(std::abs(analytic_sorted[i] - numeric[i]) <= 1e-6);
    }
}
