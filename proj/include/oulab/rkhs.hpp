#pragma once

#include "oulab/covariance.hpp"
#include "oulab/model.hpp"
#include "oulab/operator_core.hpp"

#include <optional>

namespace oulab {

/// A Hilbert subspace of state space represented by a factor matrix B:
/// the space is range(B) and |h| is the least-norm preimage energy
/// min{ |u| : B u = h }. Membership failure is the value +infinity, not an
/// error. The factor decomposition is cached eagerly so reads are const.
class RkhsSpace {
public:
    static RkhsSpace fromFactor(Matrix factor,
                                const Tolerances& tol = Tolerances::defaults());
    /// Factorizes a Gramian by its symmetric PSD square root.
    static RkhsSpace fromGram(const Matrix& gram,
                              const Tolerances& tol = Tolerances::defaults());

    const Matrix& factor() const { return factor_; }
    const Matrix& gram() const { return gram_; }
    int rank() const { return rank_; }
    int ambientDim() const { return static_cast<int>(factor_.rows()); }

    /// min{ |u| : factor u = h }, +infinity when h is not in the range.
    double norm(const Vector& h) const;

    /// Least-norm preimage with residual and membership verdict.
    LeastNormSolution preimage(const Vector& h) const;

    /// Orthonormal coordinate frame F (n x rank): |F c|_space = |c| for all c.
    const Matrix& frame() const { return frame_; }

private:
    RkhsSpace() = default;

    Matrix factor_;
    Matrix gram_;
    Matrix frame_;
    Eigen::JacobiSVD<Matrix> svd_;
    int rank_ = 0;
    Tolerances tol_;
};

/// H: the Cameron-Martin space of the model noise, factored by i.
RkhsSpace noiseSpace(const OuModel& model, const Tolerances& tol = Tolerances::defaults());

/// H_t: the RKHS of Q_t. Uses the diagonal closed form or the Lyapunov
/// identity when available, plain quadrature otherwise.
RkhsSpace gramianSpace(const OuModel& model, double t,
                       const Tolerances& tol = Tolerances::defaults());

/// H_infinity from a computed invariant covariance.
RkhsSpace invariantSpace(const Matrix& q_infinity,
                         const Tolerances& tol = Tolerances::defaults());

struct InclusionVerdict {
    bool included = false;
    /// Smallest M with <Q_A x, x> <= M <Q_B x, x>; +infinity when not included.
    double constant = kInfinity;
    /// Range equality at the rank tolerance; unknown when not established.
    std::optional<bool> dense;
};

InclusionVerdict inclusion(const RkhsSpace& a, const RkhsSpace& b,
                           const Tolerances& tol = Tolerances::defaults());

struct NormEquivalence {
    bool equivalent = false;
    double lower = 0.0;
    double upper = kInfinity;
};

/// Two-sided norm constants: lower * |h|_A <= |h|_B <= upper * |h|_A.
NormEquivalence equivalentNorms(const RkhsSpace& a, const RkhsSpace& b,
                                const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
