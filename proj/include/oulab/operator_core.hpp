#pragma once

#include "oulab/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace oulab {

/// (M + M^T) / 2. Applied after every covariance computation to suppress
/// drift of asymmetric rounding.
Matrix symmetrize(const Matrix& m);

/// Rank of `m` with singular values below rank_rel * sigma_max * max(rows, cols)
/// treated as zero.
int numericalRank(const Matrix& m, const Tolerances& tol = Tolerances::defaults());

/// Semigroup propagator t -> e^{tA}. Uses an eigendecomposition when the
/// eigenvector basis is well conditioned (< 1e6) and falls back to
/// Pade scaling-and-squaring otherwise, so Jordan-type drifts stay accurate.
class Propagator {
public:
    explicit Propagator(Matrix a);

    const Matrix& generator() const { return a_; }
    int dim() const { return static_cast<int>(a_.rows()); }

    /// e^{tA}; throws NumericalError when the result overflows.
    Matrix at(double t) const;

private:
    Matrix a_;
    bool use_eig_ = false;
    ComplexMatrix v_;
    ComplexMatrix v_inv_;
    ComplexVector eigenvalues_;
};

/// e^{tA} for a one-off evaluation.
Matrix expm(const Matrix& a, double t = 1.0);

/// Result of sup_{x not in ker R} <Qx,x> / <Rx,x> for symmetric PSD Q, R.
struct PencilResult {
    /// +infinity exactly when kernel_violation is set.
    double sup_ratio = 0.0;
    /// Unit vector attaining the ratio (or a kernel direction of R seen by Q).
    std::optional<Vector> argmax;
    /// ker R not contained in ker Q at the rank tolerance.
    bool kernel_violation = false;
};

/// Simultaneous diagonalization restricted to range(R); rejects inputs that
/// are asymmetric beyond tolerance.
PencilResult pencilSupRatio(const Matrix& q, const Matrix& r,
                            const Tolerances& tol = Tolerances::defaults());

/// Least-norm least-squares solve min |u| over argmin |Bu - y|.
struct LeastNormSolution {
    Vector solution;
    double residual = 0.0;
    /// residual <= membership * (1 + |y|).
    bool in_range = false;
};

LeastNormSolution pseudoApply(const Matrix& b, const Vector& y,
                              const Tolerances& tol = Tolerances::defaults());

/// Boundary outline of the numerical range {v* M v : |v| = 1}.
/// Each boundary point is the Rayleigh quotient of the extreme eigenvector
/// of the Hermitian part of e^{i theta} M.
struct NumericalRangeSample {
    std::vector<Complex> boundary_points;
    std::vector<double> theta_grid;
};

NumericalRangeSample numericalRange(const ComplexMatrix& m, int grid_size = 720);
NumericalRangeSample numericalRange(const Matrix& m, int grid_size = 720);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// (-1e-10 * lambda_max, 0) are clamped to zero; anything more negative is
/// rejected as indefinite.
Matrix psdSqrt(const Matrix& q);

/// Composite 16-node Gauss-Legendre integral of f over [a, b], panels doubled
/// until successive values differ by less than tol.quadrature.
double scalarQuadrature(const std::function<double(double)>& f, double a, double b,
                        const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
