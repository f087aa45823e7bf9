#include "oulab/rkhs.hpp"

namespace oulab {

RkhsSpace RkhsSpace::fromFactor(Matrix factor, const Tolerances& tol) {
    if (factor.rows() < 1 || factor.cols() < 1) {
        throw std::invalid_argument("RkhsSpace: factor must be nonempty");
    }
    if (!factor.allFinite()) {
        throw std::invalid_argument("RkhsSpace: factor has non-finite entries");
    }
    RkhsSpace space;
    space.tol_ = tol;
    space.factor_ = std::move(factor);
    space.gram_ = symmetrize(space.factor_ * space.factor_.transpose());
    space.svd_ =
        Eigen::JacobiSVD<Matrix>(space.factor_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    space.svd_.setThreshold(
        tol.rank_rel *
        static_cast<double>(std::max(space.factor_.rows(), space.factor_.cols())));
    space.rank_ = static_cast<int>(space.svd_.rank());
    space.frame_ = space.svd_.matrixU().leftCols(space.rank_) *
                   space.svd_.singularValues().head(space.rank_).asDiagonal();
    return space;
}

RkhsSpace RkhsSpace::fromGram(const Matrix& gram, const Tolerances& tol) {
    return fromFactor(psdSqrt(gram), tol);
}

LeastNormSolution RkhsSpace::preimage(const Vector& h) const {
    if (h.size() != factor_.rows()) {
        throw std::invalid_argument("RkhsSpace: vector dimension mismatch");
    }
    LeastNormSolution out;
    out.solution = svd_.solve(h);
    out.residual = (factor_ * out.solution - h).norm();
    out.in_range = out.residual <= tol_.membership * (1.0 + h.norm());
    return out;
}

double RkhsSpace::norm(const Vector& h) const {
    const LeastNormSolution p = preimage(h);
    return p.in_range ? p.solution.norm() : kInfinity;
}

RkhsSpace noiseSpace(const OuModel& model, const Tolerances& tol) {
    return RkhsSpace::fromFactor(model.noise_factor, tol);
}

RkhsSpace gramianSpace(const OuModel& model, double t, const Tolerances& tol) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("gramianSpace: t must be positive");
    }
    return RkhsSpace::fromGram(gramianAt(model, t, tol), tol);
}

RkhsSpace invariantSpace(const Matrix& q_infinity, const Tolerances& tol) {
    return RkhsSpace::fromGram(q_infinity, tol);
}

InclusionVerdict inclusion(const RkhsSpace& a, const RkhsSpace& b, const Tolerances& tol) {
    if (a.ambientDim() != b.ambientDim()) {
        throw std::invalid_argument("inclusion: ambient dimension mismatch");
    }
    const PencilResult pencil = pencilSupRatio(a.gram(), b.gram(), tol);
    InclusionVerdict verdict;
    verdict.included = !pencil.kernel_violation;
    verdict.constant = pencil.sup_ratio;
    if (verdict.included) {
        // Finite-dimensional density = range equality after projecting onto
        // range(B); anything weaker stays unknown.
        Eigen::SelfAdjointEigenSolver<Matrix> eb(b.gram());
        const Vector& lam = eb.eigenvalues();
        const double cutoff = tol.rank_rel * std::max(lam.maxCoeff(), 0.0) *
                              static_cast<double>(b.ambientDim());
        std::vector<Eigen::Index> range_idx;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            if (lam(i) > cutoff) range_idx.push_back(i);
        }
        Matrix ur(b.ambientDim(), static_cast<Eigen::Index>(range_idx.size()));
        for (size_t j = 0; j < range_idx.size(); ++j) ur.col(j) = eb.eigenvectors().col(range_idx[j]);
        const Matrix projected = ur.transpose() * a.gram() * ur;
        if (numericalRank(projected, tol) == b.rank()) verdict.dense = true;
    }
    return verdict;
}

NormEquivalence equivalentNorms(const RkhsSpace& a, const RkhsSpace& b,
                                const Tolerances& tol) {
    const PencilResult forward = pencilSupRatio(a.gram(), b.gram(), tol);
    const PencilResult backward = pencilSupRatio(b.gram(), a.gram(), tol);
    NormEquivalence out;
    out.equivalent = !forward.kernel_violation && !backward.kernel_violation;
    out.upper = forward.kernel_violation ? kInfinity : std::sqrt(forward.sup_ratio);
    out.lower = backward.kernel_violation ? 0.0
                                          : 1.0 / std::sqrt(std::max(backward.sup_ratio, 1e-300));
    return out;
}

}  // namespace oulab
