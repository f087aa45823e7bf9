#pragma once

#include "oulab/model.hpp"
#include "oulab/operator_core.hpp"

#include <map>
#include <optional>

namespace oulab {

struct QuadratureReport {
    int panels = 0;
    double last_delta = 0.0;
};

/// Composite 16-node Gauss-Legendre approximation of
/// int_0^t S(s) Q S(s)^T ds, with panel doubling until successive values
/// differ by less than tol.quadrature in Frobenius norm. Symmetrized.
Matrix gramianQuadrature(const OuModel& model, double t,
                         const Tolerances& tol = Tolerances::defaults(),
                         QuadratureReport* report = nullptr);

/// Exact Gramian of a diagonal model: diag(q_n (1 - e^{-2 a_n t}) / (2 a_n)).
Matrix closedFormDiagonalGramian(const OuModel& model, double t);

/// Q_t by the most accurate route available: closed form for diagonal models,
/// the Lyapunov identity for stable drifts, quadrature otherwise.
Matrix gramianAt(const OuModel& model, double t,
                 const Tolerances& tol = Tolerances::defaults());

bool isHurwitz(const Matrix& a);

/// Schur-form back-substitution solve of A X + X A^T = -Q for the unique
/// symmetric PSD solution. Refuses drifts that are not Hurwitz-stable.
Matrix solveLyapunov(const Matrix& a, const Matrix& q,
                     const Tolerances& tol = Tolerances::defaults());

enum class CovarianceProvenance { LyapunovIdentity, Quadrature, ClosedFormDiagonal };

const char* provenanceName(CovarianceProvenance p);

struct InvariantCovariance {
    std::optional<Matrix> q_infinity;
    bool hq_infinity_holds = false;
    CovarianceProvenance provenance = CovarianceProvenance::LyapunovIdentity;
    /// max Re of the drift spectrum.
    double spectral_abscissa = 0.0;
};

/// Q_infinity via the Lyapunov solve when the drift is stable. Otherwise the
/// boundedness of t -> trace Q_t is decided on the geometric grid t = 2^k,
/// k <= 12 (the Gramians may settle even when A is not stable); a plateau
/// yields the limit with quadrature provenance, growth yields absence.
InvariantCovariance invariantCovariance(const OuModel& model,
                                        const Tolerances& tol = Tolerances::defaults());

/// Q_infinity - S(t) Q_infinity S(t)^T, symmetrized: equals Q_t for every
/// positive symmetric solution of the Lyapunov equation.
Matrix gramianFromIdentity(const OuModel& model, const Matrix& q_infinity, double t);

struct QSymmetryResult {
    bool is_symmetric = false;
    /// |AQ - QA^T|_F / max(1, |AQ|_F).
    double defect = 0.0;
};

/// Decides S(t) Q = Q S(t)^T at the generator level (A Q = Q A^T).
QSymmetryResult checkQSymmetry(const OuModel& model,
                               const Tolerances& tol = Tolerances::defaults());

/// Time-indexed covariances plus the invariant covariance, with provenance.
struct GramianFamily {
    struct Entry {
        Matrix value;
        CovarianceProvenance provenance;
    };
    std::map<double, Entry> q_of_t;
    std::optional<Matrix> q_infinity;
    bool hq_infinity_holds = false;
};

GramianFamily assembleGramians(const OuModel& model, const std::vector<double>& times,
                               const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
