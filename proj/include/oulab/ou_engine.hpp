#pragma once

#include "oulab/covariance.hpp"
#include "oulab/model.hpp"

#include <cstdint>
#include <vector>

namespace oulab {

/// Cylindrical test function f(x) = phi(<x, d_1>, ..., <x, d_k>) with phi a
/// polynomial, or the characteristic marker e^{i <x, d>}. Polynomials replace
/// the bounded outer functions of the abstract theory so that closed-form
/// Gaussian calculus exists; total degree is capped at 4 by the moment engine.
class CylindricalFunction {
public:
    struct Term {
        double coef = 0.0;
        std::vector<int> exponents;  // one entry per direction
    };

    static CylindricalFunction polynomial(Matrix directions, std::vector<Term> terms);
    static CylindricalFunction exponential(Vector direction);
    static CylindricalFunction constant(double value, int ambient_dim);
    /// <x, d>.
    static CylindricalFunction linear(Vector direction);
    /// <x, a> <x, b>.
    static CylindricalFunction product(const Vector& a, const Vector& b);

    bool isExponential() const { return exponential_; }
    const Matrix& directions() const { return directions_; }
    const std::vector<Term>& terms() const { return terms_; }
    int directionCount() const { return static_cast<int>(directions_.cols()); }
    int degree() const;

    Complex evaluate(const Vector& x) const;

private:
    CylindricalFunction() = default;

    bool exponential_ = false;
    Matrix directions_;  // n x k
    std::vector<Term> terms_;
};

/// E f(Z) for Z ~ N(mean, cov) on state space, in closed form. Polynomials
/// use Wick pairing up to total degree 4; the exponential marker uses the
/// Gaussian characteristic functional.
Complex gaussianExpectation(const CylindricalFunction& f, const Vector& mean,
                            const Matrix& cov);

/// Deterministic Gaussian stream keyed by (seed, index): every (seed, index)
/// pair yields the same sequence regardless of evaluation order, so parallel
/// sampling stays reproducible.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t index);
    double next();

private:
    double nextUniform();
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

/// count independent draws of S(t) x + L z with L a PSD factor of Q_t.
std::vector<Vector> sampleTransition(const OuModel& model, const Vector& x, double t,
                                     int count, std::uint64_t seed,
                                     const Tolerances& tol = Tolerances::defaults());

enum class TransitionMode { Exact, MonteCarlo };

struct McOptions {
    int count = 10000;
    std::uint64_t seed = 0;
};

struct TransitionValue {
    Complex value;
    double std_error = 0.0;  // zero in exact mode
};

/// P(t) f (x) = E f(S(t) x + noise). Exact mode is a closed-form Gaussian
/// integral over N(S(t)x, Q_t) and signals on outer functions it cannot
/// integrate; Monte Carlo reports the standard error of the mean.
TransitionValue transitionApply(const OuModel& model, const CylindricalFunction& f,
                                const Vector& x, double t,
                                TransitionMode mode = TransitionMode::Exact,
                                const McOptions& mc = {},
                                const Tolerances& tol = Tolerances::defaults());

/// Generator on cylindrical functions:
/// L0 f(x) = 1/2 trace D_H^2 f(x) + <x, A* Df(x)>.
Complex generatorApply(const OuModel& model, const CylindricalFunction& f, const Vector& x);

struct IbpResult {
    double lhs = 0.0;  // int f Lg + g Lf dmu_infinity
    double rhs = 0.0;  // -int [D_H f, D_H g]_H dmu_infinity
};

/// Closed-form integration by parts against the invariant measure; requires
/// polynomial f, g of degree <= 2 and an existing invariant covariance.
IbpResult ibpCheck(const OuModel& model, const CylindricalFunction& f,
                   const CylindricalFunction& g,
                   const Tolerances& tol = Tolerances::defaults());

/// Fits the convergence order of (P(h)f - f)/h towards L0 f over a decreasing
/// step sequence; first-order convergence gives an order of about one.
double generatorConsistency(const OuModel& model, const CylindricalFunction& f,
                            const Vector& x, const std::vector<double>& steps,
                            const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
