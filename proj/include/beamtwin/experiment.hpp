#pragma once

// Experiment-level plumbing: the single config file that drives every CLI
// subcommand, JSON/CSV serialization of scenarios, datasets, traces and
// checkpoints, and multi-seed aggregation.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamtwin/orchestrator.hpp"

namespace beamtwin {

struct SweepConfig {
    std::vector<int> sample_sizes = {50, 200, 1000, 10000};
    std::vector<TwinArchitecture> architectures = {TwinArchitecture::kQuadratic,
                                                   TwinArchitecture::kDense};
    int heldout_samples = 2000;
};

struct ExperimentConfig {
    ScenarioSpec scenario;
    AgentConfig agent;   // antenna count and phase bits mirror the scenario
    TwinConfig twin;
    SwitchPolicy policy;
    SweepConfig sweep;
    int collect_samples = 1000;
    long baseline_iterations = 5000;
    int pattern_points = 361;
    double measurement_noise_db = 0.0;  // 0 disables estimation noise
    std::vector<std::uint64_t> seeds = {1};
    std::string output_dir = "out";
};

// Strict parsing: unknown keys anywhere raise InvalidConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& path);
std::string config_hash_hex(const ExperimentConfig& config);

// File headers embed (config hash, seed, artifact version) so reruns are
// checkable byte-for-byte.
struct RunStamp {
    std::string config_hash;
    std::uint64_t seed = 0;
};

std::string csv_header_comment(const RunStamp& stamp);

// --- scenario JSON (complex numbers as [re, im] pairs) ---
nlohmann::json scenario_to_json(const Scenario& scenario, const RunStamp& stamp);
Scenario scenario_from_json(const nlohmann::json& j);

// --- datasets (CSV of M phase columns + power, JSON sidecar) ---
void write_dataset_csv(const std::filesystem::path& path, const PowerDataset& dataset,
                       const RunStamp& stamp);
PowerDataset read_dataset_csv(const std::filesystem::path& path, PredictorRole role);
nlohmann::json dataset_sidecar(const PowerDataset& dataset, const std::string& scenario_hash,
                               const RunStamp& stamp);

// --- learning traces ---
void write_trace_csv(const std::filesystem::path& path, const LearningTrace& trace,
                     const RunStamp& stamp);
std::vector<double> read_trace_sinr_column(const std::filesystem::path& path);

// --- combiners and power reports ---
nlohmann::json combiner_to_json(const Combiner& combiner);
Combiner combiner_from_json(const nlohmann::json& j);
nlohmann::json power_report_to_json(const PowerReport& report);

// --- network / twin checkpoints ---
nlohmann::json network_to_json(const DenseNetworkSpec& spec, const NetworkParameters& params);
NetworkParameters network_from_json(const nlohmann::json& j, DenseNetworkSpec& spec_out);
nlohmann::json predictor_checkpoint(const PowerPredictor& predictor);

// --- multi-seed aggregation ---
struct AggregateTrace {
    std::vector<double> mean;
    std::vector<double> stddev;   // population
    std::vector<int> padded;      // how many series were padded at each row
};

// Right-pads shorter series with their final value. Deterministic summation
// order (input order).
AggregateTrace aggregate_seeds(const std::vector<std::vector<double>>& series);

void write_aggregate_csv(const std::filesystem::path& path, const AggregateTrace& aggregate,
                         const RunStamp& stamp);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace beamtwin
