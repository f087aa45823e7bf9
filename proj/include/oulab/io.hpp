#pragma once

#include "oulab/diagnostics.hpp"
#include "oulab/model.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace oulab {

/// Shortest decimal string that parses back to exactly the same double.
std::string shortestDouble(double value);

/// Parsed model file: the model plus optional tolerance and time overrides.
struct ModelConfig {
    OuModel model;
    std::optional<Tolerances> tolerances;
    std::vector<double> times;
};

ModelConfig modelFromJson(const nlohmann::json& j);
ModelConfig loadModel(const std::string& path);

nlohmann::json modelToJson(const OuModel& model);
void saveModel(const OuModel& model, const std::string& path);

Tolerances tolerancesFromJson(const nlohmann::json& j);

nlohmann::json reportToJson(const DiagnosticsReport& report, const OuModel& model,
                            const Tolerances& tol);

/// Temp-file plus rename so readers never observe partial output.
void atomicWriteFile(const std::string& path, const std::string& content);

/// Comma-separated, '.' decimal, LF line endings, one header row.
void writeCsv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows);

std::string csvToString(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows);

}  // namespace oulab
