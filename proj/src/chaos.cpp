#include "oulab/chaos.hpp"

#include <cmath>
#include <memory>
#include <unordered_map>

namespace oulab {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void enumerateGrade(int dims, int grade, MultiIndex& current,
                    std::vector<MultiIndex>& out) {
    if (dims == 1) {
        current.push_back(grade);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int head = grade; head >= 0; --head) {
        current.push_back(head);
        enumerateGrade(dims - 1, grade - head, current, out);
        current.pop_back();
    }
}

double binomialDim(int m, int k) {
    // C(m + k - 1, k)
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (m + i - 1) / i;
    return v;
}

double hermite(int order, double x) {
    if (order == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int k = 1; k < order; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace

ChaosBasis ChaosBasis::build(int whitened_dim, int max_order) {
    if (whitened_dim < 1) throw std::invalid_argument("ChaosBasis: dimension must be >= 1");
    if (max_order < 0) throw std::invalid_argument("ChaosBasis: order must be >= 0");
    if (binomialDim(whitened_dim, max_order) > kMaxBlockDim) {
        throw std::invalid_argument("ChaosBasis: top block dimension exceeds cap");
    }
    ChaosBasis basis;
    basis.whitened_dim = whitened_dim;
    basis.max_order = max_order;
    basis.order_offset.push_back(0);
    MultiIndex scratch;
    for (int k = 0; k <= max_order; ++k) {
        enumerateGrade(whitened_dim, k, scratch, basis.multi_indices);
        basis.order_offset.push_back(static_cast<int>(basis.multi_indices.size()));
    }
    basis.normalization.reserve(basis.multi_indices.size());
    for (const MultiIndex& alpha : basis.multi_indices) {
        double fact = 1.0;
        for (int a : alpha) fact *= factorial(a);
        basis.normalization.push_back(1.0 / std::sqrt(fact));
    }
    return basis;
}

double ChaosBasis::evaluate(int index, const Vector& xi) const {
    if (xi.size() != whitened_dim) {
        throw std::invalid_argument("ChaosBasis::evaluate: dimension mismatch");
    }
    const MultiIndex& alpha = multi_indices[static_cast<size_t>(index)];
    double value = normalization[static_cast<size_t>(index)];
    for (int j = 0; j < whitened_dim; ++j) {
        value *= hermite(alpha[static_cast<size_t>(j)], xi(j));
    }
    return value;
}

Matrix Whitening::map(double t) const {
    const Matrix c = forward * propagator_->at(t) * backward;
    const double norm = c.jacobiSvd().singularValues()(0);
    if (norm > 1.0 + 1e-10) {
        throw NumericalError("whitened semigroup map is not contractive (norm " +
                             std::to_string(norm) + ")");
    }
    return c;
}

Whitening whiten(const OuModel& model, const Matrix& q_infinity, const Tolerances& tol) {
    if (!model.hasMatrices()) {
        throw std::invalid_argument("whiten: model has no dense matrices");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(q_infinity));
    const Vector& lam = es.eigenvalues();
    const Eigen::Index n = lam.size();
    const double cutoff =
        tol.rank_rel * std::max(lam.maxCoeff(), 0.0) * static_cast<double>(n);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lam(i) > cutoff) keep.push_back(i);
    }
    if (keep.empty()) throw NumericalError("whiten: invariant covariance is zero");

    Whitening w;
    w.rank = static_cast<int>(keep.size());
    Matrix u(n, w.rank);
    Vector sqrt_lam(w.rank);
    for (int j = 0; j < w.rank; ++j) {
        u.col(j) = es.eigenvectors().col(keep[static_cast<size_t>(j)]);
        sqrt_lam(j) = std::sqrt(lam(keep[static_cast<size_t>(j)]));
    }
    w.forward = sqrt_lam.cwiseInverse().asDiagonal() * u.transpose();
    w.backward = u * sqrt_lam.asDiagonal();
    w.drift = w.forward * model.drift * w.backward;
    w.propagator_ = std::make_shared<Propagator>(model.drift);
    return w;
}

Whitening whiten(const OuModel& model, const Tolerances& tol) {
    const InvariantCovariance inv = invariantCovariance(model, tol);
    if (!inv.q_infinity) {
        throw NumericalError("whiten: invariant covariance does not exist for this model");
    }
    return whiten(model, *inv.q_infinity, tol);
}

ChaosOperator gammaOperator(const Matrix& contraction, const ChaosBasis& basis,
                            const Tolerances& tol) {
    const int m = basis.whitened_dim;
    if (contraction.rows() != m || contraction.cols() != m) {
        throw std::invalid_argument("gammaOperator: contraction dimension mismatch");
    }
    const double norm = contraction.jacobiSvd().singularValues()(0);
    if (norm > 1.0 + std::max(tol.symmetry, 1e-9)) {
        throw std::invalid_argument("gammaOperator: operator norm " + std::to_string(norm) +
                                    " exceeds 1");
    }

    ChaosOperator op;
    op.basis = basis;
    op.blocks.resize(static_cast<size_t>(basis.max_order) + 1);
    op.blocks[0] = Matrix::Ones(1, 1);

    for (int k = 1; k <= basis.max_order; ++k) {
        const int dim = basis.orderDim(k);
        const int offset = basis.order_offset[static_cast<size_t>(k)];
        Matrix block = Matrix::Zero(dim, dim);

        // Row lookup: pack the grade-k multi-index into a byte string.
        std::unordered_map<std::string, int> row_of;
        row_of.reserve(static_cast<size_t>(dim));
        const auto encode = [](const MultiIndex& alpha) {
            std::string code(alpha.size(), '\0');
            for (size_t i = 0; i < alpha.size(); ++i) code[i] = static_cast<char>(alpha[i]);
            return code;
        };
        for (int r = 0; r < dim; ++r) {
            row_of.emplace(encode(basis.multi_indices[static_cast<size_t>(offset + r)]), r);
        }

        for (int col = 0; col < dim; ++col) {
            const MultiIndex& alpha = basis.multi_indices[static_cast<size_t>(offset + col)];
            MultiIndex source;  // alpha expanded to a tuple of k coordinate labels
            for (int j = 0; j < m; ++j) {
                source.insert(source.end(), static_cast<size_t>(alpha[static_cast<size_t>(j)]), j);
            }

            // Expand the k-fold tensor action of C over all index tuples and
            // project each product term onto the symmetrized basis.
            MultiIndex tuple(static_cast<size_t>(k), 0);
            MultiIndex target(static_cast<size_t>(m), 0);
            while (true) {
                double coeff = 1.0;
                std::fill(target.begin(), target.end(), 0);
                for (int r = 0; r < k; ++r) {
                    coeff *= contraction(tuple[static_cast<size_t>(r)],
                                         source[static_cast<size_t>(r)]);
                    ++target[static_cast<size_t>(tuple[static_cast<size_t>(r)])];
                }
                if (coeff != 0.0) {
                    block(row_of.at(encode(target)), col) += coeff;
                }
                int pos = k - 1;
                while (pos >= 0 && tuple[static_cast<size_t>(pos)] == m - 1) {
                    tuple[static_cast<size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
                ++tuple[static_cast<size_t>(pos)];
            }
        }

        // Orthonormalize: entry(beta, alpha) scales by sqrt(beta! / alpha!).
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                block(r, c) *= basis.normalization[static_cast<size_t>(offset + c)] /
                               basis.normalization[static_cast<size_t>(offset + r)];
            }
        }
        op.blocks[static_cast<size_t>(k)] = std::move(block);
    }
    return op;
}

double ChaosOperator::blockOperatorNorm(int k) const {
    return blocks[static_cast<size_t>(k)].jacobiSvd().singularValues()(0);
}

Vector ChaosOperator::apply(const Vector& coefficients) const {
    if (coefficients.size() != basis.size()) {
        throw std::invalid_argument("ChaosOperator::apply: coefficient length mismatch");
    }
    Vector out(coefficients.size());
    for (int k = 0; k <= basis.max_order; ++k) {
        const int offset = basis.order_offset[static_cast<size_t>(k)];
        const int dim = basis.orderDim(k);
        out.segment(offset, dim) =
            blocks[static_cast<size_t>(k)] * coefficients.segment(offset, dim);
    }
    return out;
}

ChaosOperator transitionChaos(const OuModel& model, double t, int max_order,
                              const Tolerances& tol) {
    const Whitening w = whiten(model, tol);
    const ChaosBasis basis = ChaosBasis::build(w.rank, max_order);
    return gammaOperator(w.map(t).transpose(), basis, tol);
}

std::vector<Complex> generatorSpectrumChaos(const OuModel& model, int max_order,
                                            const Tolerances& tol,
                                            bool* numerical_fallback) {
    const Whitening w = whiten(model, tol);
    const ChaosBasis basis = ChaosBasis::build(w.rank, max_order);

    Eigen::EigenSolver<Matrix> es(w.drift);
    bool diagonalizable = es.info() == Eigen::Success;
    if (diagonalizable) {
        Eigen::JacobiSVD<ComplexMatrix> svd(es.eigenvectors());
        const auto& sigma = svd.singularValues();
        diagonalizable = sigma(sigma.size() - 1) > 0.0 &&
                         sigma(0) / sigma(sigma.size() - 1) < 1e6;
    }
    if (numerical_fallback) *numerical_fallback = !diagonalizable;

    std::vector<Complex> spectrum;
    spectrum.reserve(static_cast<size_t>(basis.size()));

    if (diagonalizable) {
        const ComplexVector lambda = es.eigenvalues();
        for (const MultiIndex& alpha : basis.multi_indices) {
            Complex sum = 0.0;
            for (int j = 0; j < w.rank; ++j) sum += static_cast<double>(alpha[static_cast<size_t>(j)]) * lambda(j);
            spectrum.push_back(sum);
        }
        return spectrum;
    }

    // Defective drift: difference the chaos semigroup at small h instead.
    const double h = 1e-6;
    const ChaosOperator gamma_h = gammaOperator(w.map(h).transpose(), basis, tol);
    for (int k = 0; k <= basis.max_order; ++k) {
        const Matrix& block = gamma_h.blocks[static_cast<size_t>(k)];
        const Matrix derivative =
            (block - Matrix::Identity(block.rows(), block.cols())) / h;
        Eigen::EigenSolver<Matrix> eb(derivative, /*computeEigenvectors=*/false);
        std::vector<Complex> vals(eb.eigenvalues().data(),
                                  eb.eigenvalues().data() + eb.eigenvalues().size());
        std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        spectrum.insert(spectrum.end(), vals.begin(), vals.end());
    }
    return spectrum;
}

}  // namespace oulab
