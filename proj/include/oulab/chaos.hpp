#pragma once

#include "oulab/covariance.hpp"
#include "oulab/model.hpp"

#include <memory>
#include <vector>

namespace oulab {

using MultiIndex = std::vector<int>;

/// Orthonormal Hermite basis of L^2 of an m-dimensional standard Gaussian,
/// truncated at total order K. Multi-indices are enumerated grade by grade,
/// lexicographically descending within a grade, so the ordering is
/// reproducible. Normalization is 1/sqrt(alpha!).
struct ChaosBasis {
    int whitened_dim = 0;
    int max_order = 0;
    std::vector<MultiIndex> multi_indices;
    std::vector<int> order_offset;  // size max_order + 2; grade k spans [offset[k], offset[k+1])
    std::vector<double> normalization;

    static ChaosBasis build(int whitened_dim, int max_order);

    int orderDim(int k) const { return order_offset[k + 1] - order_offset[k]; }
    int size() const { return static_cast<int>(multi_indices.size()); }

    /// Orthonormal Hermite polynomial H_alpha evaluated at a whitened point.
    double evaluate(int index, const Vector& xi) const;
};

/// Block dimensions C(m+k-1, k) above this are refused.
inline constexpr int kMaxBlockDim = 10000;

/// Whitened coordinates of range(Q_infinity): forward maps state to
/// coordinates, backward embeds them, and map(t) is the matrix of the
/// restricted semigroup S_infinity(t), a contraction.
struct Whitening {
    int rank = 0;
    Matrix forward;   // rank x n
    Matrix backward;  // n x rank
    Matrix drift;     // whitened A, rank x rank

    /// C(t) = forward S(t) backward; verified contractive to 1e-10.
    Matrix map(double t) const;

private:
    friend Whitening whiten(const OuModel&, const Matrix&, const Tolerances&);
    std::shared_ptr<const Propagator> propagator_;
};

Whitening whiten(const OuModel& model, const Matrix& q_infinity,
                 const Tolerances& tol = Tolerances::defaults());
/// Computes Q_infinity first; signals when it does not exist.
Whitening whiten(const OuModel& model, const Tolerances& tol = Tolerances::defaults());

/// Second quantization of a contraction C, block k the restriction of the
/// k-th tensor power to the symmetric subspace in the orthonormal Hermite
/// basis. Block 0 is [1] and block 1 is C itself.
struct ChaosOperator {
    ChaosBasis basis;
    std::vector<Matrix> blocks;

    double blockOperatorNorm(int k) const;
    /// Apply to a coefficient vector laid out like basis.multi_indices.
    Vector apply(const Vector& coefficients) const;
};

ChaosOperator gammaOperator(const Matrix& contraction, const ChaosBasis& basis,
                            const Tolerances& tol = Tolerances::defaults());

/// Matrix of the transition semigroup on chaos up to order K:
/// gamma of the adjoint of the whitened semigroup map at time t.
ChaosOperator transitionChaos(const OuModel& model, double t, int max_order,
                              const Tolerances& tol = Tolerances::defaults());

/// {sum_j alpha_j lambda_j : |alpha| <= K} for the whitened drift eigenvalues,
/// ordered like the basis. Falls back to differencing the chaos semigroup at
/// small h when the drift is not safely diagonalizable; *numerical_fallback
/// reports which route was taken.
std::vector<Complex> generatorSpectrumChaos(const OuModel& model, int max_order,
                                            const Tolerances& tol = Tolerances::defaults(),
                                            bool* numerical_fallback = nullptr);

}  // namespace oulab
