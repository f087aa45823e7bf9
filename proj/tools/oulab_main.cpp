#include "oulab/chaos.hpp"
#include "oulab/diagnostics.hpp"
#include "oulab/io.hpp"
#include "oulab/model.hpp"
#include "oulab/ou_engine.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace oulab;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNumerical = 3;

struct ModelSelection {
    std::string builtin;
    std::string file;
    std::string tol_profile;
};

void addModelOptions(CLI::App* cmd, ModelSelection* sel) {
    auto* builtin = cmd->add_option("--builtin", sel->builtin, "builtin model id");
    auto* file = cmd->add_option("--model", sel->file, "model JSON file");
    builtin->excludes(file);
    cmd->add_option("--tol-profile", sel->tol_profile, "tolerance profile (default|strict)")
        ->check(CLI::IsMember({"default", "strict"}));
}

struct Resolved {
    OuModel model;
    Tolerances tol;
    std::vector<double> times;
};

Resolved resolveModel(const ModelSelection& sel) {
    Resolved out;
    std::optional<Tolerances> file_tol;
    if (!sel.builtin.empty()) {
        out.model = buildBuiltin(sel.builtin);
    } else if (!sel.file.empty()) {
        ModelConfig config = loadModel(sel.file);
        out.model = std::move(config.model);
        file_tol = config.tolerances;
        out.times = std::move(config.times);
    } else {
        throw std::invalid_argument("specify a model with --builtin or --model");
    }

    // Flag beats the model file, which beats the environment profile.
    if (!sel.tol_profile.empty()) {
        out.tol = Tolerances::profile(sel.tol_profile);
    } else if (file_tol) {
        out.tol = *file_tol;
    } else if (const char* env = std::getenv("OULAB_TOL_PROFILE")) {
        out.tol = Tolerances::profile(env);
    } else {
        out.tol = Tolerances::defaults();
    }
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        atomicWriteFile(out_path, content);
    }
}

int runAnalyze(const ModelSelection& sel, const std::vector<double>& times_flag,
               const std::string& out_path) {
    Resolved r = resolveModel(sel);
    std::vector<double> times = !times_flag.empty() ? times_flag
                                : !r.times.empty()  ? r.times
                                                    : std::vector<double>{0.1, 0.5, 1.0, 2.0};
    const DiagnosticsReport report = analyze(r.model, times, r.tol);
    emit(out_path, reportToJson(report, r.model, r.tol).dump(2) + "\n");
    return kExitOk;
}

int runSimulate(const ModelSelection& sel, double t, int count, std::uint64_t seed,
                const std::vector<double>& x0_flag, bool path_mode, int steps,
                const std::string& out_path) {
    Resolved r = resolveModel(sel);
    const int n = r.model.dim();
    Vector x0 = Vector::Zero(n);
    if (!x0_flag.empty()) {
        if (static_cast<int>(x0_flag.size()) != n) {
            throw std::invalid_argument("--x0 must have one entry per state dimension");
        }
        for (int i = 0; i < n; ++i) x0(i) = x0_flag[static_cast<size_t>(i)];
    }

    std::vector<std::string> header{"t"};
    for (int i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    std::vector<std::vector<double>> rows;

    if (path_mode) {
        // One trajectory on a uniform grid; each increment uses the exact
        // Gaussian transition over the step.
        const double dt = t / steps;
        Vector state = x0;
        rows.push_back([&] {
            std::vector<double> row{0.0};
            row.insert(row.end(), state.data(), state.data() + n);
            return row;
        }());
        for (int k = 0; k < steps; ++k) {
            state = sampleTransition(r.model, state, dt, 1, seed + static_cast<std::uint64_t>(k),
                                     r.tol)[0];
            std::vector<double> row{(k + 1) * dt};
            row.insert(row.end(), state.data(), state.data() + n);
            rows.push_back(std::move(row));
        }
    } else {
        for (const Vector& sample : sampleTransition(r.model, x0, t, count, seed, r.tol)) {
            std::vector<double> row{t};
            row.insert(row.end(), sample.data(), sample.data() + n);
            rows.push_back(std::move(row));
        }
    }
    emit(out_path, csvToString(header, rows));
    return kExitOk;
}

int runChaos(const ModelSelection& sel, double t, int order, const std::string& prefix) {
    Resolved r = resolveModel(sel);
    const ChaosOperator op = transitionChaos(r.model, t, order, r.tol);
    for (int k = 0; k <= order; ++k) {
        const Matrix& block = op.blocks[static_cast<size_t>(k)];
        std::vector<std::string> header;
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
            header.push_back("c_" + std::to_string(c));
        }
        std::vector<std::vector<double>> rows;
        for (Eigen::Index row = 0; row < block.rows(); ++row) {
            rows.emplace_back(block.row(row).begin(), block.row(row).end());
        }
        const std::string body = csvToString(header, rows);
        if (prefix.empty()) {
            std::cout << "# block " << k << "\n" << body;
        } else {
            atomicWriteFile(prefix + "block" + std::to_string(k) + ".csv", body);
        }
    }
    return kExitOk;
}

int runSweep(const ModelSelection& sel, double tmin, double tmax, int steps,
             const std::string& out_path) {
    Resolved r = resolveModel(sel);
    const InvariantCovariance inv = invariantCovariance(r.model, r.tol);
    if (!inv.q_infinity) {
        throw NumericalError("sweep: model has no invariant covariance");
    }
    const SpectralGapRecord gap = spectralGap(r.model, *inv.q_infinity, r.tol);

    std::vector<std::vector<double>> rows;
    for (int k = 0; k < steps; ++k) {
        const double t = steps == 1 ? tmin : tmin + (tmax - tmin) * k / (steps - 1);
        const double norm = sInfinityNorm(r.model, *inv.q_infinity, t, r.tol);
        const double bound = gap.gap_omega ? std::exp(-t / (2.0 * gap.m_star))
                                           : std::numeric_limits<double>::quiet_NaN();
        const ChaosOperator op = transitionChaos(r.model, t, 1, r.tol);
        rows.push_back({t, norm, bound, op.blockOperatorNorm(1)});
    }
    emit(out_path, csvToString({"t", "s_infinity_norm", "exp_bound", "block1_norm"}, rows));
    return kExitOk;
}

int runExample(bool list, const std::string& id) {
    if (list || id.empty()) {
        for (const BuiltinInfo& info : builtinModels()) {
            std::cout << info.id << ": " << info.description << "\n";
        }
        return kExitOk;
    }
    const OuModel model = buildBuiltin(id);
    for (const BuiltinInfo& info : builtinModels()) {
        if (info.id == id) std::cout << "# " << info.description << "\n";
    }
    std::cout << modelToJson(model).dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Ornstein-Uhlenbeck transition semigroups"};
    app.require_subcommand(1);

    ModelSelection sel;

    auto* analyze_cmd = app.add_subcommand("analyze", "run every diagnostic, emit a JSON report");
    addModelOptions(analyze_cmd, &sel);
    std::vector<double> times_flag;
    std::string out_path;
    analyze_cmd->add_option("--times", times_flag, "times for time-sampled verdicts");
    analyze_cmd->add_option("--out", out_path, "report file (stdout when omitted)");

    auto* simulate_cmd = app.add_subcommand("simulate", "draw exact Gaussian transition samples");
    addModelOptions(simulate_cmd, &sel);
    double sim_t = 1.0;
    int sim_count = 1000;
    std::uint64_t sim_seed = 0;
    std::vector<double> sim_x0;
    bool sim_path = false;
    int sim_steps = 100;
    simulate_cmd->add_option("--t", sim_t, "time horizon")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--count", sim_count, "sample count")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim_seed, "random seed");
    simulate_cmd->add_option("--x0", sim_x0, "initial state (default 0)");
    simulate_cmd->add_flag("--path", sim_path, "emit one path on a grid instead of an ensemble");
    simulate_cmd->add_option("--steps", sim_steps, "grid steps in path mode")
        ->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--out", out_path, "CSV file (stdout when omitted)");

    auto* chaos_cmd = app.add_subcommand("chaos", "emit second-quantization blocks as CSV");
    addModelOptions(chaos_cmd, &sel);
    double chaos_t = 1.0;
    int chaos_order = 3;
    std::string chaos_prefix;
    chaos_cmd->add_option("--t", chaos_t, "time")->check(CLI::PositiveNumber);
    chaos_cmd->add_option("--order", chaos_order, "max chaos order")
        ->check(CLI::NonNegativeNumber);
    chaos_cmd->add_option("--out-prefix", chaos_prefix,
                          "file prefix; writes <prefix>block<k>.csv (stdout when omitted)");

    auto* sweep_cmd = app.add_subcommand("sweep", "grid over t: norms and exponential bound");
    addModelOptions(sweep_cmd, &sel);
    double tmin = 0.1, tmax = 5.0;
    int sweep_steps = 50;
    sweep_cmd->add_option("--tmin", tmin, "grid start")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--tmax", tmax, "grid end")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--steps", sweep_steps, "grid points")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", out_path, "CSV file (stdout when omitted)");

    auto* example_cmd = app.add_subcommand("example", "list or describe builtin models");
    bool example_list = false;
    std::string example_id;
    example_cmd->add_flag("--list", example_list, "list builtin ids");
    example_cmd->add_option("id", example_id, "builtin id to describe");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze_cmd)) return runAnalyze(sel, times_flag, out_path);
        if (app.got_subcommand(simulate_cmd)) {
            return runSimulate(sel, sim_t, sim_count, sim_seed, sim_x0, sim_path, sim_steps,
                               out_path);
        }
        if (app.got_subcommand(chaos_cmd)) return runChaos(sel, chaos_t, chaos_order, chaos_prefix);
        if (app.got_subcommand(sweep_cmd)) return runSweep(sel, tmin, tmax, sweep_steps, out_path);
        if (app.got_subcommand(example_cmd)) return runExample(example_list, example_id);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitBadInput;
}
