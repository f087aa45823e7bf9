#include "oulab/diagnostics.hpp"

#include "oulab/operator_core.hpp"

#include <cmath>

namespace oulab {

SpectralGapRecord spectralGap(const OuModel& model, const Matrix& q_infinity,
                              const Tolerances& tol) {
    SpectralGapRecord out;
    const PencilResult pencil = pencilSupRatio(symmetrize(q_infinity), model.q(), tol);
    out.witness = pencil.argmax;
    out.m_star = pencil.sup_ratio;
    out.holds = !pencil.kernel_violation && pencil.sup_ratio <= tol.huge;
    if (pencil.kernel_violation) out.m_star = kInfinity;
    if (out.holds && out.m_star > 0.0) out.gap_omega = 1.0 / (2.0 * out.m_star);

    const Whitening w = whiten(model, q_infinity, tol);
    Eigen::EigenSolver<Matrix> es(w.drift, /*computeEigenvectors=*/false);
    out.growth_bound_a_infinity = es.eigenvalues().real().maxCoeff();
    return out;
}

double sInfinityNorm(const OuModel& model, const Matrix& q_infinity, double t,
                     const Tolerances& tol) {
    const Whitening w = whiten(model, q_infinity, tol);
    return w.map(t).jacobiSvd().singularValues()(0);
}

SectorEstimate sectorConstant(const Matrix& a, const Tolerances& tol) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("sectorConstant: matrix must be square");
    }
    SectorEstimate out;
    const Eigen::Index n = a.rows();
    const double scale = std::max(1.0, a.norm());
    const Matrix r = -symmetrize(a);        // -Re of the form
    const Matrix k = 0.5 * (a - a.transpose());  // Im of the form is -i k on C^n

    Eigen::SelfAdjointEigenSolver<Matrix> er(r);
    const Vector& lam = er.eigenvalues();
    if (lam.minCoeff() < -tol.symmetry * scale) {
        return out;  // numerical range crosses into Re > 0
    }
    const double cutoff = std::max(tol.rank_rel * lam.maxCoeff() * static_cast<double>(n),
                                   tol.symmetry * scale);

    std::vector<Eigen::Index> range_idx, kernel_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
        (lam(i) > cutoff ? range_idx : kernel_idx).push_back(i);
    }

    // The range touches the imaginary axis wherever sym(a) degenerates; the
    // sector stays finite only if the skew part vanishes there too.
    if (!kernel_idx.empty()) {
        Matrix v0(n, static_cast<Eigen::Index>(kernel_idx.size()));
        for (size_t j = 0; j < kernel_idx.size(); ++j) v0.col(j) = er.eigenvectors().col(kernel_idx[j]);
        if ((k * v0).norm() > tol.symmetry * scale) {
            return out;
        }
    }

    if (range_idx.empty()) {
        // a vanishes identically at tolerance: the range is {0}.
        out.b = 0.0;
        out.raw = 0.0;
        out.finite = true;
        return out;
    }

    Matrix ur(n, static_cast<Eigen::Index>(range_idx.size()));
    Vector lr(static_cast<Eigen::Index>(range_idx.size()));
    for (size_t j = 0; j < range_idx.size(); ++j) {
        ur.col(j) = er.eigenvectors().col(range_idx[j]);
        lr(j) = lam(range_idx[j]);
    }
    const Vector inv_sqrt = lr.cwiseSqrt().cwiseInverse();
    const Matrix whitened_skew =
        inv_sqrt.asDiagonal() * (ur.transpose() * k * ur) * inv_sqrt.asDiagonal();
    const double b = whitened_skew.jacobiSvd().singularValues()(0);

    out.raw = b;
    if (b <= tol.huge) {
        out.b = b;
        out.finite = true;
    }
    return out;
}

namespace {

/// Boundary-sampling estimate of the sector constant for cross-checking the
/// exact value: max |Im z| / (-Re z) over support points, refined once by
/// doubling the grid.
double sampledSectorConstant(const Matrix& a, const Tolerances& tol) {
    const auto estimate = [&](int grid) {
        const NumericalRangeSample sample = numericalRange(a, grid);
        double best = 0.0;
        for (const Complex z : sample.boundary_points) {
            if (z.real() < -1e-12 * std::max(1.0, a.norm())) {
                best = std::max(best, std::abs(z.imag()) / -z.real());
            }
        }
        return best;
    };
    const double coarse = estimate(tol.range_grid);
    const double fine = estimate(2 * tol.range_grid);
    return std::max(coarse, fine);
}

}  // namespace

const char* verdictName(AnalyticityVerdict v) {
    switch (v) {
        case AnalyticityVerdict::Analytic: return "analytic";
        case AnalyticityVerdict::NotAnalytic: return "not-analytic";
        case AnalyticityVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

AnalyticityRecord analyticityTest(const OuModel& model, const Matrix& q_infinity,
                                  const Tolerances& tol) {
    AnalyticityRecord out;
    const Matrix q = model.q();
    const Matrix qat = q * model.drift.transpose();

    // Necessary condition: Q x = 0 forces Q A^T x = 0.
    Eigen::SelfAdjointEigenSolver<Matrix> eq(q);
    const Vector& lam = eq.eigenvalues();
    const double cutoff = tol.rank_rel * std::max(lam.maxCoeff(), 0.0) *
                          static_cast<double>(model.dim());
    out.kernel_condition_ok = true;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > cutoff) continue;
        const double leak = (qat * eq.eigenvectors().col(i)).norm();
        if (leak > tol.symmetry * std::max(1.0, qat.norm())) {
            out.kernel_condition_ok = false;
            break;
        }
    }

    // Bound |A Q_infinity x|_H <= C |i* x|_H, +infinity when A Q_infinity
    // leaves H in some direction.
    const Matrix aq_inf = model.drift * q_infinity;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(model.noise_factor);
    const Matrix lifted = cod.solve(aq_inf);  // least-norm preimages columnwise
    const double defect = (model.noise_factor * lifted - aq_inf).norm();
    if (defect <= tol.membership * (1.0 + aq_inf.norm())) {
        const PencilResult pencil =
            pencilSupRatio(symmetrize(lifted.transpose() * lifted), q, tol);
        if (!pencil.kernel_violation && pencil.sup_ratio <= tol.huge) {
            out.c_bound = pencil.sup_ratio;
        }
    }

    const Whitening w = whiten(model, q_infinity, tol);
    const SectorEstimate sector = sectorConstant(w.drift, tol);
    out.sector_constant_b = sector.finite ? sector.b : kInfinity;
    if (sector.finite) {
        out.sector_constant_sampled = sampledSectorConstant(w.drift, tol);
    }

    const bool sector_finite = sector.finite;
    const bool c_finite = std::isfinite(out.c_bound);
    if (!out.kernel_condition_ok) {
        out.verdict = AnalyticityVerdict::NotAnalytic;
    } else if (sector_finite && c_finite) {
        out.verdict = AnalyticityVerdict::Analytic;
    } else if (!sector_finite && !c_finite) {
        out.verdict = AnalyticityVerdict::NotAnalytic;
    } else {
        out.verdict = AnalyticityVerdict::Inconclusive;
    }
    return out;
}

bool isSectorialUpToSimilarity(const Matrix& a, const Tolerances& tol) {
    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) return false;
    const ComplexVector lambda = es.eigenvalues();
    const double scale = std::max(1.0, a.norm());
    int zero_count = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i)) <= tol.symmetry * scale) {
            ++zero_count;
            continue;
        }
        if (lambda(i).real() >= -tol.symmetry * scale) return false;
    }
    if (zero_count > 0) {
        // Zero eigenvalues must be semisimple for the semigroup to stay bounded.
        const int rank = numericalRank(a, tol);
        if (rank != static_cast<int>(a.rows()) - zero_count) return false;
    }
    return true;
}

namespace {

bool renormingWorks(const Matrix& x, const Matrix& a, const Tolerances& tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> ex(symmetrize(x));
    if (ex.eigenvalues().minCoeff() <= 0.0) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x * a));
    if (es.eigenvalues().maxCoeff() > tol.symmetry * std::max(1.0, (x * a).norm())) {
        return false;
    }
    const Matrix sqrt_x = psdSqrt(x);
    const Matrix inv_sqrt_x = sqrt_x.inverse();
    return sectorConstant(sqrt_x * a * inv_sqrt_x, tol).finite;
}

}  // namespace

std::optional<Matrix> findContractionRenorming(const Matrix& a, const Tolerances& tol) {
    const Eigen::Index n = a.rows();
    const Matrix identity = Matrix::Identity(n, n);
    if (renormingWorks(identity, a, tol)) return identity;

    // Eigenbasis geometry: makes the operator normal when diagonalizable.
    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() == Eigen::Success) {
        const ComplexMatrix v = es.eigenvectors();
        Eigen::JacobiSVD<ComplexMatrix> svd(v);
        const auto& sigma = svd.singularValues();
        if (sigma(sigma.size() - 1) > 0.0 && sigma(0) / sigma(sigma.size() - 1) < 1e6) {
            const Matrix candidate = (v * v.adjoint()).real().inverse();
            if (renormingWorks(symmetrize(candidate), a, tol)) {
                return symmetrize(candidate);
            }
        }
    }

    // Lyapunov geometry for stable generators.
    if (isHurwitz(a)) {
        const Matrix x = solveLyapunov(a.transpose(), identity, tol);
        if (renormingWorks(x, a, tol)) return x;
    }
    return std::nullopt;
}

const char* statusName(ImplicationResult::Status s) {
    switch (s) {
        case ImplicationResult::Status::Pass: return "pass";
        case ImplicationResult::Status::Fail: return "fail";
        case ImplicationResult::Status::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

std::vector<ImplicationResult> crossChecks(const OuModel& model, const Tolerances& tol) {
    std::vector<ImplicationResult> results;
    const InvariantCovariance inv = invariantCovariance(model, tol);
    const Restriction restriction = checkInvariance(model, {0.1, 0.5, 1.0}, tol);

    std::optional<AnalyticityRecord> analyticity;
    std::optional<InclusionVerdict> dominated;
    if (inv.q_infinity) {
        analyticity = analyticityTest(model, *inv.q_infinity, tol);
        dominated = inclusion(invariantSpace(*inv.q_infinity, tol), noiseSpace(model, tol), tol);
    }

    {
        ImplicationResult imp;
        imp.name = "p-analytic-and-dominated-implies-sh-analytic";
        const bool applicable = analyticity &&
                                analyticity->verdict == AnalyticityVerdict::Analytic &&
                                dominated && dominated->included;
        if (!applicable) {
            imp.detail = !inv.q_infinity         ? "no invariant covariance"
                         : (!dominated || !dominated->included)
                             ? "invariant space not dominated by the noise space"
                             : "transition semigroup not analytic";
        } else if (restriction.invariant && restriction.generator &&
                   isSectorialUpToSimilarity(*restriction.generator, tol)) {
            imp.status = ImplicationResult::Status::Pass;
            imp.detail = "restricted generator sectorial up to similarity";
        } else {
            imp.status = ImplicationResult::Status::Fail;
            imp.detail = restriction.invariant ? "restricted generator is not sectorial"
                                               : "noise space is not invariant";
        }
        results.push_back(std::move(imp));
    }

    {
        ImplicationResult imp;
        imp.name = "sh-analytic-contraction-implies-p-analytic";
        std::optional<Matrix> certificate;
        if (restriction.invariant && restriction.generator) {
            certificate = findContractionRenorming(*restriction.generator, tol);
        }
        if (!certificate || !analyticity) {
            imp.detail = !restriction.invariant
                             ? "noise space is not invariant"
                             : (!analyticity ? "no invariant covariance"
                                             : "no Hilbertian contraction certificate found");
        } else if (analyticity->verdict == AnalyticityVerdict::Analytic) {
            imp.status = ImplicationResult::Status::Pass;
            imp.detail = "certificate found and transition semigroup analytic";
        } else {
            imp.status = ImplicationResult::Status::Fail;
            imp.detail = "certificate found but transition semigroup not analytic";
        }
        results.push_back(std::move(imp));
    }
    return results;
}

DiagnosticsReport analyze(const OuModel& model, std::vector<double> times,
                          const Tolerances& tol) {
    if (!model.hasMatrices()) {
        throw std::invalid_argument("analyze: model has no dense matrices (series-only)");
    }
    if (times.empty()) throw std::invalid_argument("analyze: times must be nonempty");

    DiagnosticsReport report;
    report.model_name = model.name;
    report.dim = model.dim();
    report.noise_dim = model.noiseDim();
    report.times = times;

    report.q_symmetric = checkQSymmetry(model, tol);

    const Restriction restriction = checkInvariance(model, times, tol);
    report.h_invariant = restriction.invariant;
    report.h_invariant_certified = restriction.generator_certified;

    const ContractionTest contraction = contractionCriterion(model, tol);
    report.s_h_contractive = contraction.contractive;
    report.contraction_lambda_max = contraction.lambda_max;

    const InvariantCovariance inv = invariantCovariance(model, tol);
    report.hq_infinity = inv.hq_infinity_holds;
    report.q_infinity = inv.q_infinity;
    report.q_infinity_provenance = inv.provenance;

    if (inv.q_infinity) {
        report.spectral_gap = spectralGap(model, *inv.q_infinity, tol);
        report.analyticity = analyticityTest(model, *inv.q_infinity, tol);
    }

    for (double t : times) {
        report.strong_feller_at.emplace_back(t, strongFeller(model, t, tol));
    }
    report.cross_checks = crossChecks(model, tol);
    return report;
}

}  // namespace oulab
