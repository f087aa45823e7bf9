#include "oulab/restriction.hpp"

#include <cmath>

namespace oulab {

Restriction checkInvariance(const OuModel& model, const std::vector<double>& times,
                            const Tolerances& tol) {
    if (times.empty()) {
        throw std::invalid_argument("checkInvariance: times must be nonempty");
    }
    const RkhsSpace h = noiseSpace(model, tol);
    const Matrix& frame = h.frame();
    const Propagator prop(model.drift);

    Restriction out;
    out.invariant = true;
    for (double t : times) {
        const Matrix moved = prop.at(t) * frame;
        for (Eigen::Index j = 0; j < moved.cols() && out.invariant; ++j) {
            out.invariant = h.preimage(moved.col(j)).in_range;
        }
        if (!out.invariant) break;
    }

    // Generator-level condition A range(i) subseteq range(i); when it holds the
    // for-all-t statement is certified, otherwise the verdict stays sample-based.
    const Matrix af = model.drift * frame;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(frame);
    const Matrix candidate = cod.solve(af);
    out.generator_residual = (frame * candidate - af).norm();
    if (out.generator_residual <= tol.membership * (1.0 + af.norm())) {
        out.generator_certified = true;
        out.generator = candidate;
        Eigen::EigenSolver<Matrix> es(candidate, /*computeEigenvectors=*/false);
        out.growth_bound = es.eigenvalues().real().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> sym(symmetrize(candidate));
        out.contractive =
            sym.eigenvalues().maxCoeff() <= tol.symmetry * std::max(1.0, candidate.norm());
    }
    return out;
}

ContractionTest contractionCriterion(const OuModel& model, const Tolerances& tol) {
    ContractionTest out;
    const Matrix aq = model.drift * model.q();
    out.witness = symmetrize(aq);
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.witness);
    out.lambda_max = es.eigenvalues().maxCoeff();
    out.contractive = out.lambda_max <= tol.symmetry * std::max(1.0, aq.norm());
    return out;
}

namespace {

struct RestrictedFrame {
    RkhsSpace h;
    Matrix a_h;
};

RestrictedFrame requireInvariantGenerator(const OuModel& model, double t,
                                          const Tolerances& tol, const char* who) {
    Restriction restr = checkInvariance(model, {t}, tol);
    if (!restr.invariant || !restr.generator) {
        throw std::invalid_argument(std::string(who) + ": H is not S(t)-invariant");
    }
    return {noiseSpace(model, tol), std::move(*restr.generator)};
}

}  // namespace

RegularizationEstimate regularizationEstimate(const OuModel& model, double t,
                                              const Vector& h, const Tolerances& tol) {
    if (!(t > 0.0)) throw std::invalid_argument("regularizationEstimate: t must be positive");
    RestrictedFrame rf = requireInvariantGenerator(model, t, tol, "regularizationEstimate");

    RegularizationEstimate out;
    if (h.norm() == 0.0) return out;

    const LeastNormSolution pre = rf.h.preimage(h);
    if (!pre.in_range) {
        throw std::invalid_argument("regularizationEstimate: h is not in H");
    }
    // h = frame * coords with |h|_H = |coords|.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(rf.h.frame());
    const Vector coords = cod.solve(h);

    const RkhsSpace ht = gramianSpace(model, t, tol);
    out.ht_norm = ht.norm(Propagator(model.drift).at(t) * h);

    const Propagator restricted(rf.a_h);
    out.bound = scalarQuadrature(
                    [&](double s) { return (restricted.at(s) * coords).squaredNorm(); }, 0.0,
                    t, tol) /
                (t * t);
    return out;
}

EnergyIdentity normalEnergyIdentity(const OuModel& model, double t, const Vector& h,
                                    const Tolerances& tol) {
    if (!(t > 0.0)) throw std::invalid_argument("normalEnergyIdentity: t must be positive");
    RestrictedFrame rf = requireInvariantGenerator(model, t, tol, "normalEnergyIdentity");

    const Matrix& a = rf.a_h;
    const double defect = (a * a.transpose() - a.transpose() * a).norm();
    if (defect > tol.normality * std::max(a.squaredNorm(), 1e-300)) {
        throw std::invalid_argument("normalEnergyIdentity: restricted generator is not normal "
                                    "(commutator defect " + std::to_string(defect) + ")");
    }

    EnergyIdentity out;
    if (h.norm() == 0.0) return out;
    const LeastNormSolution pre = rf.h.preimage(h);
    if (!pre.in_range) {
        throw std::invalid_argument("normalEnergyIdentity: h is not in H");
    }
    out.rhs = pre.solution.squaredNorm();

    const RkhsSpace ht = gramianSpace(model, t, tol);
    const Propagator prop(model.drift);
    out.lhs = scalarQuadrature(
        [&](double s) {
            const double norm_s = ht.norm(prop.at(s) * h);
            return norm_s * norm_s;
        },
        0.0, t, tol);
    return out;
}

Matrix controllabilityMatrix(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Matrix ctrl(n, n * m);
    Matrix block = b;
    for (Eigen::Index k = 0; k < n; ++k) {
        ctrl.middleCols(k * m, m) = block;
        block = a * block;
    }
    return ctrl;
}

int kalmanRank(const OuModel& model, const Tolerances& tol) {
    Matrix ctrl = controllabilityMatrix(model.drift, model.noise_factor);
    // Column scales vary like |A|^k; normalize so the rank cutoff is fair.
    for (Eigen::Index j = 0; j < ctrl.cols(); ++j) {
        const double norm = ctrl.col(j).norm();
        if (norm > 0.0) ctrl.col(j) /= norm;
    }
    return numericalRank(ctrl, tol);
}

StrongFellerResult strongFeller(const OuModel& model, double t, const Tolerances& tol) {
    if (!(t > 0.0)) throw std::invalid_argument("strongFeller: t must be positive");

    StrongFellerResult out;
    out.kalman_rank = kalmanRank(model, tol);

    const Matrix q_t = gramianAt(model, t, tol);

    const Matrix s = Propagator(model.drift).at(t);
    const PencilResult pencil = pencilSupRatio(symmetrize(s * s.transpose()), q_t, tol);
    out.holds = !pencil.kernel_violation;
    out.domination = pencil.sup_ratio;

    const Restriction restr = checkInvariance(model, {t}, tol);
    if (restr.invariant) {
        const PencilResult direct =
            pencilSupRatio(symmetrize(s * s.transpose()), model.q(), tol);
        out.maps_into_h = !direct.kernel_violation;
    }
    return out;
}

}  // namespace oulab
