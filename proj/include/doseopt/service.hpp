#pragma once

#include "doseopt/escalation.hpp"
#include "doseopt/factorial.hpp"
#include "doseopt/rde.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace doseopt {

inline constexpr std::string_view tool_version = "0.1.0";

enum class Step { EscalateDecide, EscalateTable, EscalateSimulate, RdeCalibrate, OptimizeSimulate, Serve };

std::string_view to_string(Step step);
Step step_from_string(std::string_view text);

struct EscalationSimulationSettings {
    std::vector<double> true_tox;
    std::uint32_t trials = 1;
};

struct CalibrationSettings {
    std::vector<ExposureObservation> data;
    std::string exposure_units;
    double efficacy_floor = 0.0;
    double toxicity_ceiling = 0.0;
    double level = 0.95;
    std::optional<std::pair<double, double>> exposure_range; // default: observed range
    double mtd_or_mad = 0.0;
    RdeOptions rde;
};

struct OptimizationSettings {
    std::vector<NamedDesign> schemes;
    TrueCurveSet truth;
    std::uint64_t replicates = 10000;
    std::vector<double> ci_levels{0.80, 0.90, 0.95};
    unsigned threads = 1;
    std::string replicate_dump; // optional CSV path for per-replicate results
};

struct ServeSettings {
    std::string host = "127.0.0.1";
    int port = 8080;
};

struct RunConfig {
    Step step = Step::EscalateDecide;
    std::optional<std::uint64_t> seed;
    std::string input_path;
    std::string output_path;
    EscalationConfig escalation;
    std::optional<TrialHistory> history;
    std::uint32_t table_n_max = 12;
    EscalationSimulationSettings simulation;
    CalibrationSettings calibration;
    OptimizationSettings optimization;
    ServeSettings serve;
};

// Strict parser for the JSON run configuration. Relative file paths are
// resolved against `base_dir`. Throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Canonical form with defaults filled in; output location and thread count
// are excluded because they never change results.
nlohmann::json canonical_config(const RunConfig& config);
std::string config_digest(const RunConfig& config);
std::string digest_of(const nlohmann::json& canonical);

// Strict sub-parsers shared with the HTTP service.
EscalationConfig parse_escalation_config(const nlohmann::json& node, const std::string& path = "escalation");
TrialHistory parse_trial_history(const nlohmann::json& node, const EscalationConfig& config,
                                 const std::string& path = "history");

std::vector<ExposureObservation> parse_exposure_csv(std::string_view text);
std::vector<ExposureObservation> read_exposure_csv(const std::filesystem::path& path);

struct BundleMetadata {
    std::string tool_version;
    std::string config_digest;
    std::optional<std::uint64_t> seed;
    std::string timestamp;

    friend bool operator==(const BundleMetadata&, const BundleMetadata&) = default;
};

struct ResultBundle {
    BundleMetadata metadata;
    std::string kind;
    nlohmann::json payload;
    std::vector<std::string> diagnostics;

    friend bool operator==(const ResultBundle&, const ResultBundle&) = default;
};

// UTC ISO-8601; honours SOURCE_DATE_EPOCH for reproducible builds of artifacts.
std::string current_timestamp();

// Runs every step except Serve.
ResultBundle execute(const RunConfig& config);

// Payload builders, shared by the CLI steps and the HTTP endpoints.
nlohmann::json decision_payload(const EscalationConfig& config, const TrialHistory& history);
nlohmann::json decision_table_payload(const EscalationConfig& config, std::uint32_t n_max);
nlohmann::json mtd_payload(const EscalationConfig& config, const TrialHistory& history);

enum class OutputFormat { Table, Csv, Json };
OutputFormat format_from_string(std::string_view text);

std::string emit_results(const ResultBundle& bundle, OutputFormat format);
nlohmann::json to_json(const ResultBundle& bundle);
ResultBundle bundle_from_json(const nlohmann::json& node);

struct HttpResponse {
    int status = 200;
    std::string body;
};

// Stateless request handler behind the HTTP endpoints.
HttpResponse handle_api(std::string_view method, std::string_view path, std::string_view body);

} // namespace doseopt
