#pragma once

#include "oulab/model.hpp"
#include "oulab/rkhs.hpp"

#include <optional>
#include <vector>

namespace oulab {

/// Verdict on S(t) H subseteq H plus the restricted generator. The generator
/// a_h is always expressed in orthonormal H-coordinates (the frame of the
/// noise space), so H-operator norms are plain spectral norms.
struct Restriction {
    /// range(S(t) i) subseteq range(i) at every sampled time.
    bool invariant = false;
    /// A range(i) subseteq range(i) as well; certifies invariance for all t.
    bool generator_certified = false;
    std::optional<Matrix> generator;  // a_h, rank x rank
    double generator_residual = kInfinity;
    /// max Re of the spectrum of a_h (NaN without a generator).
    double growth_bound = std::numeric_limits<double>::quiet_NaN();
    /// lambda_max(sym(a_h)) <= 0: contraction for every t, not just samples.
    bool contractive = false;
};

Restriction checkInvariance(const OuModel& model, const std::vector<double>& times,
                            const Tolerances& tol = Tolerances::defaults());

struct ContractionTest {
    bool contractive = false;
    /// Symmetric part of A Q; contraction of S_H is lambda_max(witness) <= 0.
    Matrix witness;
    double lambda_max = 0.0;
};

ContractionTest contractionCriterion(const OuModel& model,
                                     const Tolerances& tol = Tolerances::defaults());

struct RegularizationEstimate {
    /// |S(t) h| measured in H_t.
    double ht_norm = 0.0;
    /// (1/t^2) int_0^t |S_H(s) h|_H^2 ds: the energy of the averaged-orbit
    /// control reaching S(t) h, so it dominates ht_norm^2.
    double bound = 0.0;
};

/// Requires an invariant H and h in H.
RegularizationEstimate regularizationEstimate(const OuModel& model, double t,
                                              const Vector& h,
                                              const Tolerances& tol = Tolerances::defaults());

struct EnergyIdentity {
    double lhs = 0.0;  // int_0^t |S_H(s) h|_{H_t}^2 ds
    double rhs = 0.0;  // |h|_H^2
};

/// Exact for normal restricted semigroups; refuses non-normal generators.
EnergyIdentity normalEnergyIdentity(const OuModel& model, double t, const Vector& h,
                                    const Tolerances& tol = Tolerances::defaults());

struct StrongFellerResult {
    bool holds = false;
    /// rank [i, Ai, ..., A^{n-1} i]; equals rank Q_t in finite dimension.
    int kalman_rank = 0;
    /// sup of <S(t)S(t)^T x, x> / <Q_t x, x>; finite exactly when holds.
    double domination = kInfinity;
    /// When H is S-invariant: the simpler verdict S(t)E subseteq H.
    std::optional<bool> maps_into_h;
};

StrongFellerResult strongFeller(const OuModel& model, double t,
                                const Tolerances& tol = Tolerances::defaults());

/// [i, Ai, ..., A^{n-1} i].
Matrix controllabilityMatrix(const Matrix& a, const Matrix& b);
int kalmanRank(const OuModel& model, const Tolerances& tol = Tolerances::defaults());

}  // namespace oulab
