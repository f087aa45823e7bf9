#include "oulab/operator_core.hpp"

#include "gauss_legendre.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace oulab {

namespace {

constexpr double kEigBasisConditionLimit = 1e6;

void requireSquare(const Matrix& a, const char* who) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
    }
    if (!a.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
    }
}

void requireSymmetric(const Matrix& m, const char* who) {
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > 1e-8 * scale) {
        throw std::invalid_argument(std::string(who) + ": matrix asymmetric beyond tolerance");
    }
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

int numericalRank(const Matrix& m, const Tolerances& tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sigma = svd.singularValues();
    const double cutoff =
        tol.rank_rel * sigma(0) * static_cast<double>(std::max(m.rows(), m.cols()));
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) ++rank;
    }
    return rank;
}

Propagator::Propagator(Matrix a) : a_(std::move(a)) {
    requireSquare(a_, "Propagator");
    const Eigen::Index n = a_.rows();
    if (n == 0) return;

    if ((a_ - a_.transpose()).norm() <= 1e-14 * std::max(1.0, a_.norm())) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a_));
        v_ = es.eigenvectors().cast<Complex>();
        v_inv_ = es.eigenvectors().transpose().cast<Complex>();
        eigenvalues_ = es.eigenvalues().cast<Complex>();
        use_eig_ = true;
        return;
    }

    Eigen::EigenSolver<Matrix> es(a_);
    if (es.info() != Eigen::Success) return;
    const ComplexMatrix v = es.eigenvectors();
    Eigen::JacobiSVD<ComplexMatrix> svd(v);
    const auto& sigma = svd.singularValues();
    if (sigma(n - 1) <= 0.0 || sigma(0) / sigma(n - 1) >= kEigBasisConditionLimit) {
        return;  // Jordan-like basis, keep the Pade path
    }
    v_ = v;
    v_inv_ = v.inverse();
    eigenvalues_ = es.eigenvalues();
    use_eig_ = true;
}

Matrix Propagator::at(double t) const {
    const Eigen::Index n = a_.rows();
    if (t == 0.0) return Matrix::Identity(n, n);
    if (!std::isfinite(t) || t < 0.0) {
        throw std::invalid_argument("Propagator::at: time must be finite and nonnegative");
    }

    Matrix result;
    if (use_eig_) {
        ComplexVector w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = std::exp(t * eigenvalues_(i));
        result = (v_ * w.asDiagonal() * v_inv_).real();
    } else {
        result = (t * a_).exp();
    }
    if (!result.allFinite()) {
        throw NumericalError("matrix exponential unrepresentable at t = " + std::to_string(t));
    }
    return result;
}

Matrix expm(const Matrix& a, double t) { return Propagator(a).at(t); }

PencilResult pencilSupRatio(const Matrix& q, const Matrix& r, const Tolerances& tol) {
    requireSquare(q, "pencilSupRatio");
    requireSquare(r, "pencilSupRatio");
    if (q.rows() != r.rows()) {
        throw std::invalid_argument("pencilSupRatio: dimension mismatch");
    }
    requireSymmetric(q, "pencilSupRatio");
    requireSymmetric(r, "pencilSupRatio");

    const Eigen::Index n = r.rows();
    const double dim = static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> er(symmetrize(r));
    const Vector& lam = er.eigenvalues();
    const Matrix& u = er.eigenvectors();
    const double lam_max = lam.size() > 0 ? std::max(lam(n - 1), 0.0) : 0.0;
    const double cutoff = tol.rank_rel * lam_max * dim;

    std::vector<Eigen::Index> range_idx, kernel_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
        (lam(i) > cutoff ? range_idx : kernel_idx).push_back(i);
    }

    PencilResult result;

    // ker R seen through Q decides finiteness.
    if (!kernel_idx.empty()) {
        Matrix k(n, static_cast<Eigen::Index>(kernel_idx.size()));
        for (size_t j = 0; j < kernel_idx.size(); ++j) k.col(j) = u.col(kernel_idx[j]);
        Eigen::SelfAdjointEigenSolver<Matrix> ek(symmetrize(k.transpose() * q * k));
        const double q_on_kernel = ek.eigenvalues().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> eq(symmetrize(q));
        const double q_scale = std::max(eq.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
        if (q_on_kernel > tol.rank_rel * q_scale * dim) {
            result.sup_ratio = kInfinity;
            result.kernel_violation = true;
            Vector w = ek.eigenvectors().col(k.cols() - 1);
            result.argmax = (k * w).normalized();
            return result;
        }
    }

    if (range_idx.empty()) {
        // R numerically zero and Q vanishes on all of ker R: empty sup.
        return result;
    }

    Matrix ur(n, static_cast<Eigen::Index>(range_idx.size()));
    Vector lr(static_cast<Eigen::Index>(range_idx.size()));
    for (size_t j = 0; j < range_idx.size(); ++j) {
        ur.col(j) = u.col(range_idx[j]);
        lr(j) = lam(range_idx[j]);
    }
    const Vector inv_sqrt = lr.cwiseSqrt().cwiseInverse();
    const Matrix w = symmetrize(inv_sqrt.asDiagonal() * (ur.transpose() * q * ur) *
                                inv_sqrt.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Matrix> ew(w);
    result.sup_ratio = std::max(ew.eigenvalues().maxCoeff(), 0.0);
    result.argmax = (ur * (inv_sqrt.asDiagonal() * ew.eigenvectors().col(w.cols() - 1)))
                        .normalized();
    return result;
}

LeastNormSolution pseudoApply(const Matrix& b, const Vector& y, const Tolerances& tol) {
    if (b.rows() != y.size()) {
        throw std::invalid_argument("pseudoApply: dimension mismatch");
    }
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol.rank_rel * static_cast<double>(std::max(b.rows(), b.cols())));
    LeastNormSolution out;
    out.solution = svd.solve(y);
    out.residual = (b * out.solution - y).norm();
    out.in_range = out.residual <= tol.membership * (1.0 + y.norm());
    return out;
}

NumericalRangeSample numericalRange(const ComplexMatrix& m, int grid_size) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("numericalRange: matrix must be square");
    }
    if (grid_size < 1) {
        throw std::invalid_argument("numericalRange: grid_size must be positive");
    }
    NumericalRangeSample sample;
    sample.boundary_points.reserve(grid_size);
    sample.theta_grid.reserve(grid_size);
    const double step = 2.0 * M_PI / static_cast<double>(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        const double theta = k * step;
        const ComplexMatrix rotated = std::polar(1.0, theta) * m;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
            0.5 * (rotated + rotated.adjoint()));
        const ComplexVector v = es.eigenvectors().col(m.cols() - 1);
        sample.boundary_points.push_back((v.adjoint() * m * v)(0, 0));
        sample.theta_grid.push_back(theta);
    }
    return sample;
}

NumericalRangeSample numericalRange(const Matrix& m, int grid_size) {
    return numericalRange(ComplexMatrix(m.cast<Complex>()), grid_size);
}

double scalarQuadrature(const std::function<double(double)>& f, double a, double b,
                        const Tolerances& tol) {
    if (!(b >= a)) throw std::invalid_argument("scalarQuadrature: bad interval");
    if (b == a) return 0.0;
    const auto composite = [&](int panels) {
        double acc = 0.0;
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = a + (p + 0.5) * h;
            for (int i = 0; i < detail::kGaussNodes / 2; ++i) {
                acc += detail::kGaussWeight[i] * 0.5 * h *
                       (f(mid - detail::kGaussNode[i] * 0.5 * h) +
                        f(mid + detail::kGaussNode[i] * 0.5 * h));
            }
        }
        return acc;
    };
    int panels = 1;
    double value = composite(panels);
    double delta = kInfinity;
    for (int d = 0; d < tol.max_doublings; ++d) {
        panels *= 2;
        const double refined = composite(panels);
        delta = std::abs(refined - value);
        value = refined;
        if (delta < tol.quadrature * std::max(1.0, std::abs(value))) return value;
    }
    throw NumericalError("scalarQuadrature: no convergence (achieved error " +
                         std::to_string(delta) + ")");
}

Matrix psdSqrt(const Matrix& q) {
    requireSquare(q, "psdSqrt");
    requireSymmetric(q, "psdSqrt");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(q));
    Vector lam = es.eigenvalues();
    const double lam_max = std::max(lam.maxCoeff(), 0.0);
    const double floor = -1e-10 * std::max(lam_max, 1e-15);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < floor) {
            throw NumericalError("psdSqrt: matrix is indefinite (eigenvalue " +
                                 std::to_string(lam(i)) + ")");
        }
        lam(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    return symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace oulab
