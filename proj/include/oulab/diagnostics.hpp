#pragma once

#include "oulab/chaos.hpp"
#include "oulab/covariance.hpp"
#include "oulab/model.hpp"
#include "oulab/restriction.hpp"
#include "oulab/rkhs.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oulab {

struct SpectralGapRecord {
    bool holds = false;
    /// sup <Q_infinity x, x> / <Q x, x>; the exponential bound is
    /// |S_infinity(t)| <= exp(-t / (2 m_star)).
    double m_star = kInfinity;
    std::optional<double> gap_omega;  // 1 / (2 m_star) when the sup is finite
    /// max Re of the whitened drift spectrum; its negative is the exact gap.
    double growth_bound_a_infinity = std::numeric_limits<double>::quiet_NaN();
    std::optional<Vector> witness;  // pencil maximizer or violating direction
};

SpectralGapRecord spectralGap(const OuModel& model, const Matrix& q_infinity,
                              const Tolerances& tol = Tolerances::defaults());

/// |S_infinity(t)| on the invariant-covariance space: square root of the top
/// generalized eigenvalue of (S Q_infinity S^T, Q_infinity) on range(Q_infinity).
double sInfinityNorm(const OuModel& model, const Matrix& q_infinity, double t,
                     const Tolerances& tol = Tolerances::defaults());

/// Smallest b with |Im <Av, v>| <= b (-Re <Av, v>) over the complex numerical
/// range; +infinity when the range touches {Re >= 0} away from 0 or leaks
/// through the kernel of the symmetric part.
struct SectorEstimate {
    double b = kInfinity;
    bool finite = false;
    double raw = kInfinity;  // uncapped value when finite but above the huge cutoff
};

SectorEstimate sectorConstant(const Matrix& a, const Tolerances& tol = Tolerances::defaults());

enum class AnalyticityVerdict { Analytic, NotAnalytic, Inconclusive };

const char* verdictName(AnalyticityVerdict v);

struct AnalyticityRecord {
    /// Sector constant of the whitened drift in the invariant geometry.
    double sector_constant_b = kInfinity;
    /// sup |A Q_infinity x|_H^2 / <Qx, x>; +infinity when A Q_infinity leaves H.
    double c_bound = kInfinity;
    /// Necessary condition: Q x = 0 forces Q A^T x = 0.
    bool kernel_condition_ok = false;
    AnalyticityVerdict verdict = AnalyticityVerdict::Inconclusive;
    /// Sampled boundary estimate of the sector constant (numerical-range sweep);
    /// NaN when the exact constant is infinite.
    double sector_constant_sampled = std::numeric_limits<double>::quiet_NaN();
};

AnalyticityRecord analyticityTest(const OuModel& model, const Matrix& q_infinity,
                                  const Tolerances& tol = Tolerances::defaults());

struct ImplicationResult {
    std::string name;
    enum class Status { Pass, Fail, NotApplicable } status = Status::NotApplicable;
    std::string detail;
};

const char* statusName(ImplicationResult::Status s);

/// The two cross-implications between analyticity of the transition semigroup
/// and analyticity of the restricted semigroup. Reported one-directionally;
/// nothing is inferred across the untested middle ground.
std::vector<ImplicationResult> crossChecks(const OuModel& model,
                                           const Tolerances& tol = Tolerances::defaults());

/// Spectrum lies in {Re < 0} up to a semisimple zero, which in finite
/// dimension is exactly "bounded analytic on a sector after a similarity".
bool isSectorialUpToSimilarity(const Matrix& a, const Tolerances& tol = Tolerances::defaults());

/// Searches X > 0 with sym(X a) <= 0 whose geometry also makes the numerical
/// range sectorial: the Hilbertian-contraction certificate. Candidates are the
/// identity, the eigenbasis Gram inverse, and the Lyapunov solution.
std::optional<Matrix> findContractionRenorming(const Matrix& a,
                                               const Tolerances& tol = Tolerances::defaults());

struct DiagnosticsReport {
    std::string model_name;
    int dim = 0;
    int noise_dim = 0;
    std::vector<double> times;

    QSymmetryResult q_symmetric;
    bool h_invariant = false;
    bool h_invariant_certified = false;
    bool s_h_contractive = false;
    double contraction_lambda_max = 0.0;

    bool hq_infinity = false;
    std::optional<Matrix> q_infinity;
    CovarianceProvenance q_infinity_provenance = CovarianceProvenance::LyapunovIdentity;

    std::optional<SpectralGapRecord> spectral_gap;
    std::optional<AnalyticityRecord> analyticity;
    std::vector<std::pair<double, StrongFellerResult>> strong_feller_at;
    std::vector<ImplicationResult> cross_checks;
};

/// Runs every criterion on one model. All sub-verdicts are deterministic
/// functions of the model and the tolerance record.
DiagnosticsReport analyze(const OuModel& model,
                          std::vector<double> times = {0.1, 0.5, 1.0, 2.0},
                          const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
