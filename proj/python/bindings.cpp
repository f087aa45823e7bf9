#include "oulab/chaos.hpp"
#include "oulab/covariance.hpp"
#include "oulab/diagnostics.hpp"
#include "oulab/io.hpp"
#include "oulab/model.hpp"
#include "oulab/operator_core.hpp"
#include "oulab/ou_engine.hpp"
#include "oulab/restriction.hpp"
#include "oulab/rkhs.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace oulab;

namespace {

const Tolerances& toleranceProfile(const std::string& profile) {
    return Tolerances::profile(profile);
}

py::dict reportDict(const DiagnosticsReport& report, const OuModel& model,
                    const Tolerances& tol) {
    // Route through the JSON layer so Python sees exactly the CLI schema.
    const std::string text = reportToJson(report, model, tol).dump();
    py::object loads = py::module_::import("json").attr("loads");
    return loads(text);
}

}  // namespace

PYBIND11_MODULE(oulab, m) {
    m.doc() = "Numerical laboratory for Ornstein-Uhlenbeck transition semigroups";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<OuModel>(m, "OuModel")
        .def_property_readonly("name", [](const OuModel& mdl) { return mdl.name; })
        .def_property_readonly("drift", [](const OuModel& mdl) { return mdl.drift; })
        .def_property_readonly("noise_factor",
                               [](const OuModel& mdl) { return mdl.noise_factor; })
        .def_property_readonly("dim", &OuModel::dim)
        .def_property_readonly("noise_dim", &OuModel::noiseDim)
        .def_property_readonly("q", &OuModel::q)
        .def("__repr__", [](const OuModel& mdl) {
            return "<OuModel '" + mdl.name + "' dim=" + std::to_string(mdl.dim()) + ">";
        });

    m.def("make_model", &makeModel, py::arg("name"), py::arg("drift"),
          py::arg("noise_factor"), py::arg("tol") = Tolerances::defaults(),
          "Model from a drift matrix and an injective noise factor");
    m.def("build_paper_2x2", &buildPaper2x2);
    m.def(
        "build_diagonal",
        [](std::vector<double> q, std::vector<double> a, const std::string& name) {
            return buildDiagonal(std::move(q), std::move(a), name);
        },
        py::arg("q"), py::arg("a"), py::arg("name") = "diagonal");
    m.def("build_heat_spectral", &buildHeatSpectral, py::arg("beta"), py::arg("n"));
    m.def("power_law_sequence", &powerLawSequence, py::arg("c"), py::arg("p"), py::arg("n"));
    m.def("build_builtin", &buildBuiltin, py::arg("id"));
    m.def("builtin_ids", [] {
        std::vector<std::string> ids;
        for (const auto& info : builtinModels()) ids.push_back(info.id);
        return ids;
    });
    m.def(
        "load_model", [](const std::string& path) { return loadModel(path).model; },
        py::arg("path"));
    m.def(
        "save_model",
        [](const OuModel& model, const std::string& path) { saveModel(model, path); },
        py::arg("model"), py::arg("path"));

    m.def(
        "expm", [](const Matrix& a, double t) { return expm(a, t); }, py::arg("a"),
        py::arg("t") = 1.0);
    m.def(
        "pencil_sup_ratio",
        [](const Matrix& q, const Matrix& r, const std::string& profile) {
            const PencilResult res = pencilSupRatio(q, r, toleranceProfile(profile));
            return py::make_tuple(res.sup_ratio, res.kernel_violation);
        },
        py::arg("q"), py::arg("r"), py::arg("profile") = "default");
    m.def(
        "pseudo_apply",
        [](const Matrix& b, const Vector& y) {
            const LeastNormSolution s = pseudoApply(b, y);
            return py::make_tuple(s.solution, s.residual, s.in_range);
        },
        py::arg("b"), py::arg("y"));

    m.def(
        "gramian", [](const OuModel& model, double t) { return gramianAt(model, t); },
        py::arg("model"), py::arg("t"), "Q_t by the most accurate available route");
    m.def(
        "gramian_quadrature",
        [](const OuModel& model, double t) { return gramianQuadrature(model, t); },
        py::arg("model"), py::arg("t"));
    m.def(
        "solve_lyapunov",
        [](const OuModel& model) { return solveLyapunov(model.drift, model.q()); },
        py::arg("model"), "Invariant covariance of a stable model");
    m.def(
        "invariant_covariance",
        [](const OuModel& model) -> py::object {
            const InvariantCovariance inv = invariantCovariance(model);
            py::dict d;
            d["hq_infinity_holds"] = inv.hq_infinity_holds;
            d["q_infinity"] = inv.q_infinity ? py::cast(*inv.q_infinity) : py::none();
            d["provenance"] = provenanceName(inv.provenance);
            return d;
        },
        py::arg("model"));
    m.def(
        "check_q_symmetry",
        [](const OuModel& model) {
            const QSymmetryResult r = checkQSymmetry(model);
            return py::make_tuple(r.is_symmetric, r.defect);
        },
        py::arg("model"));

    m.def(
        "rkhs_norm",
        [](const Matrix& factor, const Vector& h) {
            return RkhsSpace::fromFactor(factor).norm(h);
        },
        py::arg("factor"), py::arg("h"),
        "Least-norm RKHS norm of h in range(factor); inf outside");
    m.def(
        "inclusion",
        [](const Matrix& gram_a, const Matrix& gram_b) {
            const InclusionVerdict v =
                inclusion(RkhsSpace::fromGram(gram_a), RkhsSpace::fromGram(gram_b));
            return py::make_tuple(v.included, v.constant);
        },
        py::arg("gram_a"), py::arg("gram_b"));

    m.def(
        "strong_feller",
        [](const OuModel& model, double t) {
            const StrongFellerResult r = strongFeller(model, t);
            return py::make_tuple(r.holds, r.kalman_rank, r.domination);
        },
        py::arg("model"), py::arg("t"));
    m.def(
        "s_infinity_norm",
        [](const OuModel& model, double t) {
            const InvariantCovariance inv = invariantCovariance(model);
            if (!inv.q_infinity) throw NumericalError("no invariant covariance");
            return sInfinityNorm(model, *inv.q_infinity, t);
        },
        py::arg("model"), py::arg("t"));

    m.def(
        "analyze",
        [](const OuModel& model, std::vector<double> times, const std::string& profile) {
            const Tolerances& tol = toleranceProfile(profile);
            if (times.empty()) times = {0.1, 0.5, 1.0, 2.0};
            return reportDict(analyze(model, times, tol), model, tol);
        },
        py::arg("model"), py::arg("times") = std::vector<double>{},
        py::arg("profile") = "default", "Full diagnostics report as a dict");

    m.def(
        "sample_transition",
        [](const OuModel& model, const Vector& x, double t, int count, std::uint64_t seed) {
            const std::vector<Vector> samples = sampleTransition(model, x, t, count, seed);
            Matrix out(count, model.dim());
            for (int i = 0; i < count; ++i) out.row(i) = samples[static_cast<size_t>(i)];
            return out;
        },
        py::arg("model"), py::arg("x"), py::arg("t"), py::arg("count"), py::arg("seed"),
        "count x dim array of exact transition samples");

    m.def(
        "transition_chaos",
        [](const OuModel& model, double t, int order) {
            const ChaosOperator op = transitionChaos(model, t, order);
            std::vector<Matrix> blocks(op.blocks.begin(), op.blocks.end());
            return blocks;
        },
        py::arg("model"), py::arg("t"), py::arg("order"),
        "Second-quantization blocks 0..order of the transition semigroup");
    m.def(
        "generator_spectrum_chaos",
        [](const OuModel& model, int order) {
            return generatorSpectrumChaos(model, order);
        },
        py::arg("model"), py::arg("order"));
}
