#include "oulab/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace oulab {

using nlohmann::json;

std::string shortestDouble(double value) {
    char buffer[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value) break;
    }
    return buffer;
}

namespace {

Matrix matrixFromJson(const json& j, const char* field) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw std::invalid_argument(std::string("model config: '") + field +
                                    "' must be an array of rows");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument(std::string("model config: ragged rows in '") +
                                        field + "'");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<size_t>(c)].get<double>();
        }
    }
    return m;
}

json matrixToJson(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> sequenceFromJson(const json& j, int n, const char* field) {
    if (j.is_array()) {
        std::vector<double> seq = j.get<std::vector<double>>();
        if (static_cast<int>(seq.size()) != n) {
            throw std::invalid_argument(std::string("model config: '") + field +
                                        "' length must equal N");
        }
        return seq;
    }
    if (j.is_object() && j.value("rule", "") == "power-law") {
        return powerLawSequence(j.at("c").get<double>(), j.at("p").get<double>(), n);
    }
    throw std::invalid_argument(std::string("model config: '") + field +
                                "' must be a numeric list or a power-law rule");
}

json extendedReal(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

ModelConfig modelFromJson(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("model config: not a JSON object");
    ModelConfig config;
    const std::string kind = j.value("kind", "dense");
    const std::string name = j.value("name", "unnamed");
    if (kind == "dense") {
        config.model = makeModel(name, matrixFromJson(j.at("A"), "A"),
                                 matrixFromJson(j.at("i_factor"), "i_factor"));
    } else if (kind == "diagonal") {
        const json& diag = j.at("diagonal");
        const int n = diag.at("N").get<int>();
        if (n < 1) throw std::invalid_argument("model config: N must be >= 1");
        config.model = buildDiagonal(sequenceFromJson(diag.at("q"), n, "q"),
                                     sequenceFromJson(diag.at("a"), n, "a"), name);
    } else {
        throw std::invalid_argument("model config: kind must be 'dense' or 'diagonal'");
    }
    if (j.contains("tolerances")) config.tolerances = tolerancesFromJson(j.at("tolerances"));
    if (j.contains("times")) {
        config.times = j.at("times").get<std::vector<double>>();
        for (double t : config.times) {
            if (!(t > 0.0)) throw std::invalid_argument("model config: times must be positive");
        }
    }
    return config;
}

ModelConfig loadModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("model file " + path + ": " + e.what());
    }
    return modelFromJson(j);
}

json modelToJson(const OuModel& model) {
    json j;
    j["name"] = model.name;
    if (model.kind == ModelKind::Diagonal && model.series) {
        j["kind"] = "diagonal";
        j["diagonal"] = {{"N", static_cast<int>(model.series->q.size())},
                         {"q", model.series->q},
                         {"a", model.series->a}};
    } else {
        j["kind"] = "dense";
        j["A"] = matrixToJson(model.drift);
        j["i_factor"] = matrixToJson(model.noise_factor);
    }
    return j;
}

void saveModel(const OuModel& model, const std::string& path) {
    atomicWriteFile(path, modelToJson(model).dump(2) + "\n");
}

Tolerances tolerancesFromJson(const json& j) {
    Tolerances tol = Tolerances::profile(j.value("profile", "default"));
    if (j.contains("rank_rel")) tol.rank_rel = j.at("rank_rel").get<double>();
    if (j.contains("membership")) tol.membership = j.at("membership").get<double>();
    if (j.contains("quadrature")) tol.quadrature = j.at("quadrature").get<double>();
    if (j.contains("lyapunov")) tol.lyapunov = j.at("lyapunov").get<double>();
    if (j.contains("symmetry")) tol.symmetry = j.at("symmetry").get<double>();
    if (j.contains("normality")) tol.normality = j.at("normality").get<double>();
    if (j.contains("range_grid")) tol.range_grid = j.at("range_grid").get<int>();
    return tol;
}

json reportToJson(const DiagnosticsReport& report, const OuModel& model,
                  const Tolerances& tol) {
    json j;
    j["model"] = {{"name", report.model_name},
                  {"dim", report.dim},
                  {"noise_dim", report.noise_dim}};
    j["times"] = report.times;
    j["q_symmetric"] = {{"is_symmetric", report.q_symmetric.is_symmetric},
                        {"defect", report.q_symmetric.defect}};
    j["h_invariant"] = report.h_invariant;
    j["h_invariant_certified"] = report.h_invariant_certified;
    j["s_h_contractive"] = report.s_h_contractive;
    j["hq_infinity"] = report.hq_infinity;
    j["q_infinity"] = report.q_infinity ? matrixToJson(*report.q_infinity) : json(nullptr);
    j["q_infinity_provenance"] = provenanceName(report.q_infinity_provenance);

    if (report.spectral_gap) {
        const auto& gap = *report.spectral_gap;
        j["spectral_gap"] = {
            {"holds", gap.holds},
            {"m_star", extendedReal(gap.m_star)},
            {"gap_omega", gap.gap_omega ? json(*gap.gap_omega) : json(nullptr)},
            {"growth_bound_a_infinity", extendedReal(gap.growth_bound_a_infinity)}};
    } else {
        j["spectral_gap"] = nullptr;
    }

    if (report.analyticity) {
        const auto& an = *report.analyticity;
        j["analyticity"] = {{"verdict", verdictName(an.verdict)},
                            {"sector_constant_b", extendedReal(an.sector_constant_b)},
                            {"c_bound", extendedReal(an.c_bound)},
                            {"kernel_condition_ok", an.kernel_condition_ok},
                            {"sector_constant_sampled",
                             extendedReal(an.sector_constant_sampled)}};
    } else {
        j["analyticity"] = nullptr;
    }

    json feller = json::array();
    for (const auto& [t, sf] : report.strong_feller_at) {
        feller.push_back({{"t", t},
                          {"holds", sf.holds},
                          {"kalman_rank", sf.kalman_rank},
                          {"domination", extendedReal(sf.domination)},
                          {"maps_into_h",
                           sf.maps_into_h ? json(*sf.maps_into_h) : json(nullptr)}});
    }
    j["strong_feller_at"] = std::move(feller);

    json checks = json::array();
    for (const auto& imp : report.cross_checks) {
        checks.push_back(
            {{"name", imp.name}, {"status", statusName(imp.status)}, {"detail", imp.detail}});
    }
    j["cross_checks"] = std::move(checks);

    // Enough raw material to re-verify the headline verdicts independently.
    json certificates;
    certificates["contraction_lambda_max"] = report.contraction_lambda_max;
    if (report.spectral_gap && report.spectral_gap->witness) {
        const Vector& w = *report.spectral_gap->witness;
        certificates["m_star_witness"] = std::vector<double>(w.data(), w.data() + w.size());
    } else {
        certificates["m_star_witness"] = nullptr;
    }
    if (report.q_infinity && report.spectral_gap) {
        json samples = json::array();
        for (double t : report.times) {
            json row;
            row["t"] = t;
            row["s_infinity_norm"] = sInfinityNorm(model, *report.q_infinity, t, tol);
            row["exp_bound"] = report.spectral_gap->gap_omega
                                   ? json(std::exp(-t / (2.0 * report.spectral_gap->m_star)))
                                   : json(nullptr);
            samples.push_back(std::move(row));
        }
        certificates["s_infinity_norm_samples"] = std::move(samples);
    }
    j["certificates"] = std::move(certificates);
    return j;
}

void atomicWriteFile(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string csvToString(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw std::invalid_argument("csv row length does not match header");
        }
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << shortestDouble(row[i]);
        }
        out << '\n';
    }
    return out.str();
}

void writeCsv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows) {
    atomicWriteFile(path, csvToString(header, rows));
}

}  // namespace oulab
