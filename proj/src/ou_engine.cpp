#include "oulab/ou_engine.hpp"

#include "oulab/operator_core.hpp"

#include <cmath>

namespace oulab {

namespace {

constexpr int kMaxMomentDegree = 4;

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

// E prod z_{idx[i]} for centered jointly Gaussian z with covariance cov:
// sum over perfect matchings (Wick pairing).
double centeredMoment(const Matrix& cov, std::vector<int>& idx) {
    const size_t p = idx.size();
    if (p == 0) return 1.0;
    if (p % 2 == 1) return 0.0;
    if (p == 2) return cov(idx[0], idx[1]);
    double total = 0.0;
    const int first = idx[0];
    for (size_t j = 1; j < p; ++j) {
        std::vector<int> rest;
        rest.reserve(p - 2);
        for (size_t i = 1; i < p; ++i) {
            if (i != j) rest.push_back(idx[i]);
        }
        total += cov(first, idx[j]) * centeredMoment(cov, rest);
    }
    return total;
}

// E prod y_i^{e_i} for y ~ N(mean, cov), via binomial expansion into
// centered moments.
double gaussianMoment(const Vector& mean, const Matrix& cov, const std::vector<int>& e) {
    const size_t d = e.size();
    std::vector<int> c(d, 0);
    double total = 0.0;
    while (true) {
        double weight = 1.0;
        std::vector<int> flat;
        for (size_t i = 0; i < d; ++i) {
            weight *= binomial(e[i], c[i]) *
                      std::pow(mean(static_cast<Eigen::Index>(i)), e[i] - c[i]);
            flat.insert(flat.end(), static_cast<size_t>(c[i]), static_cast<int>(i));
        }
        if (weight != 0.0) total += weight * centeredMoment(cov, flat);
        size_t pos = 0;
        while (pos < d && c[pos] == e[pos]) {
            c[pos] = 0;
            ++pos;
        }
        if (pos == d) break;
        ++c[pos];
    }
    return total;
}

int termDegree(const CylindricalFunction::Term& term) {
    int deg = 0;
    for (int e : term.exponents) deg += e;
    return deg;
}

// Polynomial in finitely many linear functionals of the state, closed under
// the operations integration by parts needs (products, generator, gradients).
struct Poly {
    Matrix dirs;  // n x d
    std::vector<CylindricalFunction::Term> terms;

    int degree() const {
        int deg = 0;
        for (const auto& t : terms) deg = std::max(deg, termDegree(t));
        return deg;
    }
};

Poly toPoly(const CylindricalFunction& f) {
    if (f.isExponential()) {
        throw std::invalid_argument("expected a polynomial cylindrical function");
    }
    return Poly{f.directions(), f.terms()};
}

Poly multiply(const Poly& a, const Poly& b) {
    Poly out;
    const int da = static_cast<int>(a.dirs.cols());
    const int db = static_cast<int>(b.dirs.cols());
    out.dirs.resize(a.dirs.rows(), da + db);
    out.dirs << a.dirs, b.dirs;
    out.terms.reserve(a.terms.size() * b.terms.size());
    for (const auto& ta : a.terms) {
        for (const auto& tb : b.terms) {
            CylindricalFunction::Term t;
            t.coef = ta.coef * tb.coef;
            t.exponents.assign(static_cast<size_t>(da + db), 0);
            for (int i = 0; i < da; ++i) t.exponents[static_cast<size_t>(i)] = ta.exponents[static_cast<size_t>(i)];
            for (int i = 0; i < db; ++i) t.exponents[static_cast<size_t>(da + i)] = tb.exponents[static_cast<size_t>(i)];
            out.terms.push_back(std::move(t));
        }
    }
    return out;
}

// L0 applied to a polynomial: the trace term keeps the directions, the drift
// term extends them with A^T d_j.
Poly generatorPoly(const OuModel& model, const Poly& f) {
    const int d = static_cast<int>(f.dirs.cols());
    Poly out;
    out.dirs.resize(f.dirs.rows(), 2 * d);
    out.dirs << f.dirs, model.drift.transpose() * f.dirs;

    const Matrix q_h = f.dirs.transpose() * model.q() * f.dirs;

    for (const auto& term : f.terms) {
        // 1/2 sum_jk Q_H(j,k) d^2/dy_j dy_k
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                const int ej = term.exponents[static_cast<size_t>(j)];
                const int ek = term.exponents[static_cast<size_t>(k)];
                double factor;
                std::vector<int> e(static_cast<size_t>(2 * d), 0);
                for (int i = 0; i < d; ++i) e[static_cast<size_t>(i)] = term.exponents[static_cast<size_t>(i)];
                if (j == k) {
                    if (ej < 2) continue;
                    factor = ej * (ej - 1);
                    e[static_cast<size_t>(j)] -= 2;
                } else {
                    if (ej < 1 || ek < 1) continue;
                    factor = ej * ek;
                    e[static_cast<size_t>(j)] -= 1;
                    e[static_cast<size_t>(k)] -= 1;
                }
                out.terms.push_back({0.5 * q_h(j, k) * factor * term.coef, std::move(e)});
            }
        }
        // sum_j d/dy_j phi * <x, A^T d_j>
        for (int j = 0; j < d; ++j) {
            const int ej = term.exponents[static_cast<size_t>(j)];
            if (ej < 1) continue;
            std::vector<int> e(static_cast<size_t>(2 * d), 0);
            for (int i = 0; i < d; ++i) e[static_cast<size_t>(i)] = term.exponents[static_cast<size_t>(i)];
            e[static_cast<size_t>(j)] -= 1;
            e[static_cast<size_t>(d + j)] += 1;
            out.terms.push_back({static_cast<double>(ej) * term.coef, std::move(e)});
        }
    }
    return out;
}

double expectCentered(const Poly& p, const Matrix& cov_state) {
    const Matrix cov = p.dirs.transpose() * cov_state * p.dirs;
    const Vector mean = Vector::Zero(p.dirs.cols());
    double total = 0.0;
    for (const auto& term : p.terms) {
        if (termDegree(term) > kMaxMomentDegree) {
            throw std::invalid_argument("degree too high for closed-form Gaussian moments");
        }
        total += term.coef * gaussianMoment(mean, cov, term.exponents);
    }
    return total;
}

double evalPartial(const std::vector<CylindricalFunction::Term>& terms, const Vector& y,
                   int j) {
    double total = 0.0;
    for (const auto& term : terms) {
        const int ej = term.exponents[static_cast<size_t>(j)];
        if (ej < 1) continue;
        double v = term.coef * ej;
        for (size_t i = 0; i < term.exponents.size(); ++i) {
            const int e = term.exponents[i] - (static_cast<int>(i) == j ? 1 : 0);
            v *= std::pow(y(static_cast<Eigen::Index>(i)), e);
        }
        total += v;
    }
    return total;
}

double evalPartial2(const std::vector<CylindricalFunction::Term>& terms, const Vector& y,
                    int j, int k) {
    double total = 0.0;
    for (const auto& term : terms) {
        int ej = term.exponents[static_cast<size_t>(j)];
        int ek = term.exponents[static_cast<size_t>(k)];
        double factor;
        if (j == k) {
            if (ej < 2) continue;
            factor = ej * (ej - 1);
        } else {
            if (ej < 1 || ek < 1) continue;
            factor = ej * ek;
        }
        double v = term.coef * factor;
        for (size_t i = 0; i < term.exponents.size(); ++i) {
            int e = term.exponents[i];
            if (static_cast<int>(i) == j) e -= (j == k) ? 2 : 1;
            if (static_cast<int>(i) == k && j != k) e -= 1;
            v *= std::pow(y(static_cast<Eigen::Index>(i)), e);
        }
        total += v;
    }
    return total;
}

}  // namespace

CylindricalFunction CylindricalFunction::polynomial(Matrix directions,
                                                    std::vector<Term> terms) {
    if (directions.cols() < 1) {
        throw std::invalid_argument("CylindricalFunction: needs at least one direction");
    }
    for (const Term& t : terms) {
        if (t.exponents.size() != static_cast<size_t>(directions.cols())) {
            throw std::invalid_argument("CylindricalFunction: exponent length mismatch");
        }
        for (int e : t.exponents) {
            if (e < 0) throw std::invalid_argument("CylindricalFunction: negative exponent");
        }
        if (!std::isfinite(t.coef)) {
            throw std::invalid_argument("CylindricalFunction: non-finite coefficient");
        }
    }
    CylindricalFunction f;
    f.directions_ = std::move(directions);
    f.terms_ = std::move(terms);
    return f;
}

CylindricalFunction CylindricalFunction::exponential(Vector direction) {
    CylindricalFunction f;
    f.exponential_ = true;
    f.directions_ = direction;
    return f;
}

CylindricalFunction CylindricalFunction::constant(double value, int ambient_dim) {
    Matrix dirs = Matrix::Zero(ambient_dim, 1);
    return polynomial(std::move(dirs), {{value, {0}}});
}

CylindricalFunction CylindricalFunction::linear(Vector direction) {
    Matrix dirs = direction;
    return polynomial(std::move(dirs), {{1.0, {1}}});
}

CylindricalFunction CylindricalFunction::product(const Vector& a, const Vector& b) {
    Matrix dirs(a.size(), 2);
    dirs << a, b;
    return polynomial(std::move(dirs), {{1.0, {1, 1}}});
}

int CylindricalFunction::degree() const {
    if (exponential_) return -1;
    int deg = 0;
    for (const Term& t : terms_) deg = std::max(deg, termDegree(t));
    return deg;
}

Complex CylindricalFunction::evaluate(const Vector& x) const {
    if (x.size() != directions_.rows()) {
        throw std::invalid_argument("CylindricalFunction: state dimension mismatch");
    }
    if (exponential_) {
        return std::exp(Complex(0.0, directions_.col(0).dot(x)));
    }
    const Vector y = directions_.transpose() * x;
    double total = 0.0;
    for (const Term& term : terms_) {
        double v = term.coef;
        for (size_t i = 0; i < term.exponents.size(); ++i) {
            v *= std::pow(y(static_cast<Eigen::Index>(i)), term.exponents[i]);
        }
        total += v;
    }
    return total;
}

Complex gaussianExpectation(const CylindricalFunction& f, const Vector& mean,
                            const Matrix& cov) {
    if (mean.size() != f.directions().rows() || cov.rows() != mean.size() ||
        cov.cols() != mean.size()) {
        throw std::invalid_argument("gaussianExpectation: dimension mismatch");
    }
    if (f.isExponential()) {
        const Vector w = f.directions().col(0);
        return std::exp(Complex(-0.5 * w.dot(cov * w), mean.dot(w)));
    }
    if (f.degree() > kMaxMomentDegree) {
        throw std::invalid_argument(
            "gaussianExpectation: polynomial degree exceeds the moment engine cap (4)");
    }
    const Vector y_mean = f.directions().transpose() * mean;
    const Matrix y_cov = f.directions().transpose() * cov * f.directions();
    double total = 0.0;
    for (const auto& term : f.terms()) {
        total += term.coef * gaussianMoment(y_mean, y_cov, term.exponents);
    }
    return total;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(mix64(seed ^ 0x2545F4914F6CDD1DULL) + index)) {}

double GaussianStream::nextUniform() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>((z >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

double GaussianStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = nextUniform();
    const double u2 = nextUniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
}

std::vector<Vector> sampleTransition(const OuModel& model, const Vector& x, double t,
                                     int count, std::uint64_t seed, const Tolerances& tol) {
    if (!(t > 0.0)) throw std::invalid_argument("sampleTransition: t must be positive");
    if (count < 1) throw std::invalid_argument("sampleTransition: count must be >= 1");
    if (x.size() != model.dim()) {
        throw std::invalid_argument("sampleTransition: state dimension mismatch");
    }
    const Matrix factor = psdSqrt(gramianAt(model, t, tol));
    const Vector mean = Propagator(model.drift).at(t) * x;
    const Eigen::Index n = model.dim();

    std::vector<Vector> samples;
    samples.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        GaussianStream stream(seed, static_cast<std::uint64_t>(i));
        Vector z(n);
        for (Eigen::Index j = 0; j < n; ++j) z(j) = stream.next();
        samples.push_back(mean + factor * z);
    }
    return samples;
}

TransitionValue transitionApply(const OuModel& model, const CylindricalFunction& f,
                                const Vector& x, double t, TransitionMode mode,
                                const McOptions& mc, const Tolerances& tol) {
    if (!(t > 0.0)) throw std::invalid_argument("transitionApply: t must be positive");
    TransitionValue out;
    if (mode == TransitionMode::Exact) {
        const Vector mean = Propagator(model.drift).at(t) * x;
        out.value = gaussianExpectation(f, mean, gramianAt(model, t, tol));
        return out;
    }
    const std::vector<Vector> samples = sampleTransition(model, x, t, mc.count, mc.seed, tol);
    Complex sum = 0.0;
    for (const Vector& s : samples) sum += f.evaluate(s);
    const Complex mean_value = sum / static_cast<double>(mc.count);
    double var = 0.0;
    for (const Vector& s : samples) var += std::norm(f.evaluate(s) - mean_value);
    out.value = mean_value;
    out.std_error = mc.count > 1
                        ? std::sqrt(var / (static_cast<double>(mc.count) *
                                           (static_cast<double>(mc.count) - 1.0)))
                        : 0.0;
    return out;
}

Complex generatorApply(const OuModel& model, const CylindricalFunction& f, const Vector& x) {
    if (x.size() != model.dim()) {
        throw std::invalid_argument("generatorApply: state dimension mismatch");
    }
    const Matrix& dirs = f.directions();
    const Vector drift_state = model.drift * x;

    if (f.isExponential()) {
        const Vector w = dirs.col(0);
        const Complex factor(-0.5 * w.dot(model.q() * w), w.dot(drift_state));
        return factor * f.evaluate(x);
    }

    const Vector y = dirs.transpose() * x;
    const Matrix q_h = dirs.transpose() * model.q() * dirs;
    const int d = f.directionCount();
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            if (q_h(j, k) != 0.0) {
                total += 0.5 * q_h(j, k) * evalPartial2(f.terms(), y, j, k);
            }
        }
        total += evalPartial(f.terms(), y, j) * dirs.col(j).dot(drift_state);
    }
    return total;
}

IbpResult ibpCheck(const OuModel& model, const CylindricalFunction& f,
                   const CylindricalFunction& g, const Tolerances& tol) {
    if (f.isExponential() || g.isExponential() || f.degree() > 2 || g.degree() > 2) {
        throw std::invalid_argument("ibpCheck: needs polynomial functions of degree <= 2");
    }
    const InvariantCovariance inv = invariantCovariance(model, tol);
    if (!inv.q_infinity) {
        throw NumericalError("ibpCheck: invariant covariance does not exist");
    }
    const Matrix& q_inf = *inv.q_infinity;

    const Poly pf = toPoly(f);
    const Poly pg = toPoly(g);

    IbpResult out;
    out.lhs = expectCentered(multiply(pf, generatorPoly(model, pg)), q_inf) +
              expectCentered(multiply(pg, generatorPoly(model, pf)), q_inf);

    // [D_H f, D_H g]_H = sum_jk d_j phi_f d_k phi_g <Q d_{f,j}, d_{g,k}>.
    const Matrix coupling = pf.dirs.transpose() * model.q() * pg.dirs;
    Poly inner;
    const int df = static_cast<int>(pf.dirs.cols());
    const int dg = static_cast<int>(pg.dirs.cols());
    inner.dirs.resize(pf.dirs.rows(), df + dg);
    inner.dirs << pf.dirs, pg.dirs;
    for (int j = 0; j < df; ++j) {
        for (int k = 0; k < dg; ++k) {
            if (coupling(j, k) == 0.0) continue;
            for (const auto& tf : pf.terms) {
                const int ej = tf.exponents[static_cast<size_t>(j)];
                if (ej < 1) continue;
                for (const auto& tg : pg.terms) {
                    const int ek = tg.exponents[static_cast<size_t>(k)];
                    if (ek < 1) continue;
                    CylindricalFunction::Term term;
                    term.coef = coupling(j, k) * tf.coef * ej * tg.coef * ek;
                    term.exponents.assign(static_cast<size_t>(df + dg), 0);
                    for (int i = 0; i < df; ++i) {
                        term.exponents[static_cast<size_t>(i)] = tf.exponents[static_cast<size_t>(i)];
                    }
                    for (int i = 0; i < dg; ++i) {
                        term.exponents[static_cast<size_t>(df + i)] = tg.exponents[static_cast<size_t>(i)];
                    }
                    term.exponents[static_cast<size_t>(j)] -= 1;
                    term.exponents[static_cast<size_t>(df + k)] -= 1;
                    inner.terms.push_back(std::move(term));
                }
            }
        }
    }
    out.rhs = -expectCentered(inner, q_inf);
    return out;
}

double generatorConsistency(const OuModel& model, const CylindricalFunction& f,
                            const Vector& x, const std::vector<double>& steps,
                            const Tolerances& tol) {
    if (steps.size() < 2) {
        throw std::invalid_argument("generatorConsistency: need at least two steps");
    }
    const Complex f_x = f.evaluate(x);
    const Complex generator_value = generatorApply(model, f, x);

    double floor = 1e-15 * (1.0 + std::abs(generator_value));
    std::vector<double> log_h, log_err;
    for (double h : steps) {
        if (!(h > 0.0)) throw std::invalid_argument("generatorConsistency: steps must be positive");
        const Complex quotient =
            (transitionApply(model, f, x, h, TransitionMode::Exact, {}, tol).value - f_x) / h;
        const double err = std::max(std::abs(quotient - generator_value), floor);
        log_h.push_back(std::log(h));
        log_err.push_back(std::log(err));
    }

    // Least-squares slope of log err against log h.
    const double n = static_cast<double>(log_h.size());
    double sh = 0, se = 0, shh = 0, she = 0;
    for (size_t i = 0; i < log_h.size(); ++i) {
        sh += log_h[i];
        se += log_err[i];
        shh += log_h[i] * log_h[i];
        she += log_h[i] * log_err[i];
    }
    const double denom = n * shh - sh * sh;
    if (std::abs(denom) < 1e-14) return 0.0;
    const double slope = (n * she - sh * se) / denom;

    // Errors pinned at rounding level mean the quotient already matches.
    bool all_floored = true;
    for (double le : log_err) all_floored = all_floored && le <= std::log(floor) + 1e-12;
    return all_floored ? 2.0 : slope;
}

}  // namespace oulab
