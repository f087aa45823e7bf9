#pragma once

#include "oulab/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oulab {

enum class ModelKind { Dense, Diagonal };

/// Sequence data for diagonal models: drift -a_n, noise sqrt(q_n) per mode.
/// Kept alongside the dense matrices so series diagnostics stay O(N) and
/// large truncations (N beyond kDenseLimit) remain usable without dense storage.
struct DiagonalSeries {
    std::vector<double> q;
    std::vector<double> a;

    /// sup_n q_n / a_n; finiteness of the limit decides whether the Gramians
    /// stay bounded as t grows.
    double supQoverA() const;
    /// Partial sum of q_n (trace of the noise covariance).
    double sumQ() const;
    /// Partial sum of q_n / a_n (twice the trace of the invariant covariance).
    double sumQoverA() const;
};

/// Drift matrix A plus noise embedding factor i (injective n x m); the noise
/// covariance is Q = i i^T and the Cameron-Martin space is range(i) with the
/// least-norm inner product.
struct OuModel {
    std::string name;
    Matrix drift;         // A, n x n
    Matrix noise_factor;  // i, n x m
    ModelKind kind = ModelKind::Dense;
    std::optional<DiagonalSeries> series;

    int dim() const { return static_cast<int>(drift.rows()); }
    int noiseDim() const { return static_cast<int>(noise_factor.cols()); }
    bool hasMatrices() const { return drift.size() > 0; }

    /// Q = i i^T.
    Matrix q() const { return noise_factor * noise_factor.transpose(); }
};

/// Diagonal truncations above this size keep only the series data.
inline constexpr int kDenseLimit = 512;

/// Validates shapes, finiteness and numerical injectivity of the noise factor.
OuModel makeModel(std::string name, Matrix drift, Matrix noise_factor,
                  const Tolerances& tol = Tolerances::defaults());

/// 2x2 model with Jordan-block drift [[-1,1],[0,-1]] and rank-one noise
/// factor (0,1)^T, so Q = diag(0,1).
OuModel buildPaper2x2();

/// Diagonal model A = diag(-a_n), i = diag(sqrt(q_n)), truncated at N = q.size().
OuModel buildDiagonal(std::vector<double> q, std::vector<double> a,
                      std::string name = "diagonal");

/// q_n = c * n^{-p}.
std::vector<double> powerLawSequence(double c, double p, int n);

/// Spectral truncation of the 1-d Dirichlet heat model: a_n = (n pi)^2,
/// q_n = (n pi)^{-2 beta}.
OuModel buildHeatSpectral(double beta, int n);

/// True when beta clears the 1-d noise-regularity threshold beta > d/4 - 1/2.
bool heatThresholdHolds(double beta);

struct BuiltinInfo {
    std::string id;
    std::string description;
};

/// Builtin models reachable from the CLI (`--builtin <id>`).
const std::vector<BuiltinInfo>& builtinModels();
OuModel buildBuiltin(const std::string& id);

}  // namespace oulab
