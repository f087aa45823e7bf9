#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace oulab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thrown when a computation is well-posed but fails numerically
/// (non-convergent quadrature, indefinite covariance, overflow, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// All tolerances live in one record so a run can be reproduced from a
/// single profile. Values are the defaults; `strict()` tightens them.
struct Tolerances {
    // Singular values below rank_rel * sigma_max * max(rows, cols) count as zero.
    double rank_rel = 1e-10;
    // Declares h in range(B) when the least-norm residual is <= membership * (1 + |h|).
    double membership = 1e-8;
    // Frobenius-norm target for panel-doubling quadrature.
    double quadrature = 1e-9;
    // Relative residual accepted from the Lyapunov solver.
    double lyapunov = 1e-9;
    // Threshold on the normalized defect |AQ - QA^T| used by symmetry verdicts.
    double symmetry = 1e-9;
    // Relative commutator defect below which a generator counts as normal.
    double normality = 1e-8;
    // Constants above this are reported as +infinity (raw value kept).
    double huge = 1e12;
    // Angles sampled when outlining a numerical range.
    int range_grid = 720;
    // Quadrature gives up after this many panel doublings.
    int max_doublings = 14;

    static const Tolerances& defaults() {
        static const Tolerances tol{};
        return tol;
    }

    static const Tolerances& strict() {
        static const Tolerances tol = [] {
            Tolerances t;
            t.rank_rel = 1e-12;
            t.membership = 1e-10;
            t.quadrature = 1e-11;
            t.lyapunov = 1e-11;
            t.symmetry = 1e-11;
            t.normality = 1e-10;
            t.range_grid = 1440;
            return t;
        }();
        return tol;
    }

    /// Resolve "default" / "strict" profile names (CLI flag and env var).
    static const Tolerances& profile(const std::string& name);
};

inline const Tolerances& Tolerances::profile(const std::string& name) {
    if (name == "strict") return strict();
    if (name.empty() || name == "default") return defaults();
    throw std::invalid_argument("unknown tolerance profile: " + name);
}

}  // namespace oulab
