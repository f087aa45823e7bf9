#include "oulab/model.hpp"

#include "oulab/operator_core.hpp"

#include <cmath>

namespace oulab {

double DiagonalSeries::supQoverA() const {
    double sup = 0.0;
    for (size_t i = 0; i < q.size(); ++i) sup = std::max(sup, q[i] / a[i]);
    return sup;
}

double DiagonalSeries::sumQ() const {
    double s = 0.0;
    for (size_t i = q.size(); i-- > 0;) s += q[i];
    return s;
}

double DiagonalSeries::sumQoverA() const {
    double s = 0.0;
    for (size_t i = q.size(); i-- > 0;) s += q[i] / a[i];
    return s;
}

OuModel makeModel(std::string name, Matrix drift, Matrix noise_factor,
                  const Tolerances& tol) {
    if (drift.rows() != drift.cols()) {
        throw std::invalid_argument("makeModel: drift must be square");
    }
    if (noise_factor.rows() != drift.rows()) {
        throw std::invalid_argument("makeModel: noise factor row count must match drift");
    }
    if (noise_factor.cols() < 1 || drift.rows() < 1) {
        throw std::invalid_argument("makeModel: dimensions must be positive");
    }
    if (!drift.allFinite() || !noise_factor.allFinite()) {
        throw std::invalid_argument("makeModel: non-finite entries");
    }
    Eigen::JacobiSVD<Matrix> svd(noise_factor);
    const auto& sigma = svd.singularValues();
    const double cutoff = tol.rank_rel * sigma(0) *
                          static_cast<double>(std::max(noise_factor.rows(), noise_factor.cols()));
    if (sigma(sigma.size() - 1) <= cutoff) {
        throw std::invalid_argument("makeModel: noise factor is not numerically injective");
    }
    OuModel model;
    model.name = std::move(name);
    model.drift = std::move(drift);
    model.noise_factor = std::move(noise_factor);
    return model;
}

OuModel buildPaper2x2() {
    Matrix a(2, 2);
    a << -1.0, 1.0, 0.0, -1.0;
    Matrix i_factor(2, 1);
    i_factor << 0.0, 1.0;
    OuModel model = makeModel("paper-2x2", std::move(a), std::move(i_factor));
    return model;
}

OuModel buildDiagonal(std::vector<double> q, std::vector<double> a, std::string name) {
    if (q.empty() || q.size() != a.size()) {
        throw std::invalid_argument("buildDiagonal: q and a must be nonempty and equally long");
    }
    for (size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0) || !(a[i] > 0.0)) {
            throw std::invalid_argument("buildDiagonal: q_n and a_n must be positive");
        }
    }
    OuModel model;
    model.name = std::move(name);
    model.kind = ModelKind::Diagonal;
    const int n = static_cast<int>(q.size());
    if (n <= kDenseLimit) {
        model.drift = Matrix::Zero(n, n);
        model.noise_factor = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            model.drift(i, i) = -a[i];
            model.noise_factor(i, i) = std::sqrt(q[i]);
        }
    }
    model.series = DiagonalSeries{std::move(q), std::move(a)};
    return model;
}

std::vector<double> powerLawSequence(double c, double p, int n) {
    if (n < 1) throw std::invalid_argument("powerLawSequence: n must be >= 1");
    std::vector<double> seq(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        seq[static_cast<size_t>(i)] = c * std::pow(static_cast<double>(i + 1), -p);
    }
    return seq;
}

OuModel buildHeatSpectral(double beta, int n) {
    if (beta < 0.0) throw std::invalid_argument("buildHeatSpectral: beta must be >= 0");
    if (n < 1) throw std::invalid_argument("buildHeatSpectral: n must be >= 1");
    std::vector<double> q(static_cast<size_t>(n)), a(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double mode = (i + 1) * M_PI;
        a[static_cast<size_t>(i)] = mode * mode;
        q[static_cast<size_t>(i)] = std::pow(mode, -2.0 * beta);
    }
    OuModel model = buildDiagonal(std::move(q), std::move(a), "heat-1d");
    return model;
}

bool heatThresholdHolds(double beta) { return beta > 0.25 - 0.5; }

const std::vector<BuiltinInfo>& builtinModels() {
    static const std::vector<BuiltinInfo> list = {
        {"paper-2x2",
         "Jordan drift [[-1,1],[0,-1]] with Q = diag(0,1); invertible invariant "
         "covariance but no exponential domination and no analyticity"},
        {"isotropic-2d", "A = -I_2, Q = I_2; selfadjoint with spectral gap 1"},
        {"diagonal-slow", "q_n = n^-2, a_n = n^-1, N = 100; bounded Gramians but "
         "divergent sum q_n/a_n"},
        {"diagonal-summable", "q_n = n^-3, a_n = n^-1, N = 100; summable q_n/a_n"},
        {"heat-1d-b0", "Dirichlet heat truncation, beta = 0, N = 50"},
        {"heat-1d-b1", "Dirichlet heat truncation, beta = 1, N = 50"},
    };
    return list;
}

OuModel buildBuiltin(const std::string& id) {
    if (id == "paper-2x2") return buildPaper2x2();
    if (id == "isotropic-2d") {
        return makeModel("isotropic-2d", -Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    }
    if (id == "diagonal-slow") {
        return buildDiagonal(powerLawSequence(1.0, 2.0, 100), powerLawSequence(1.0, 1.0, 100),
                             "diagonal-slow");
    }
    if (id == "diagonal-summable") {
        return buildDiagonal(powerLawSequence(1.0, 3.0, 100), powerLawSequence(1.0, 1.0, 100),
                             "diagonal-summable");
    }
    if (id == "heat-1d-b0") return buildHeatSpectral(0.0, 50);
    if (id == "heat-1d-b1") return buildHeatSpectral(1.0, 50);
    throw std::invalid_argument("unknown builtin model: " + id);
}

}  // namespace oulab
