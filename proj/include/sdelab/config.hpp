#pragma once

#include "sdelab/engine.hpp"
#include "sdelab/model.hpp"
#include "sdelab/noise.hpp"
#include "sdelab/oracle.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdelab {

struct ItoScanConfig {
    PhiSpec phi;
    double f = 0.0;
    double g = 0.0;
    std::vector<double> h_grid;

    bool operator==(const ItoScanConfig&) const = default;
};

// One config file fully determines one experiment, seeds included.
struct ExperimentConfig {
    std::string name = "experiment";
    ModelSpec model;
    NoiseSpec noise;
    std::uint64_t seed = 1;
    std::int64_t n_paths = 1;
    std::int64_t n_steps = 1000;
    int checkpoints_per_decade = 32;
    std::optional<double> lambda_override;
    std::optional<double> mu_override;
    std::vector<std::string> statistics;
    std::string output_dir = "out";
    std::map<std::string, double> tolerances;
    std::optional<ItoScanConfig> ito;

    bool operator==(const ExperimentConfig&) const = default;
};

// Parsing names the offending field on error; parse(serialize(c)) == c.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

// Classifies the model and refuses statistics whose hypotheses the regime or
// the noise violates, unless force is set. Unknown statistic names are
// refused regardless of force.
void check_statistics_allowed(const ExperimentConfig& cfg, bool force);

// Effective decay exponent / extreme-statistic exponent for the run
// (classifier defaults, respecting config overrides).
std::pair<double, double> effective_lambda_mu(const ExperimentConfig& cfg);

struct ReportRow {
    std::string experiment;
    std::int64_t stream = 0; // -1 for ensemble aggregates
    std::string statistic;
    std::int64_t window_lo = 0;
    std::int64_t window_hi = 0;
    double value = 0.0;
};

// Orchestration entry points shared by the CLI and the tests.
RegimeReport run_regime(const ExperimentConfig& cfg);       // writes regime.json
EnsembleRun run_simulate(const ExperimentConfig& cfg, bool force,
                         ExecMode mode = ExecMode::parallel); // writes path/decade/summary CSVs
std::vector<ReportRow> run_report(const ExperimentConfig& cfg, bool force,
                                  ExecMode mode = ExecMode::parallel); // + report.csv
ItoScanResult run_ito(const ExperimentConfig& cfg);         // writes ito_scan.csv

// CSV writers (header row plus a metadata comment with config hash and seed).
void write_path_csv(const std::string& path, const PathRecord& rec,
                    std::uint64_t cfg_hash, std::uint64_t seed);
void write_decades_csv(const std::string& path, const PathRecord& rec,
                       std::uint64_t cfg_hash, std::uint64_t seed);
void write_summary_csv(const std::string& path, const EnsembleSummary& summary,
                       std::uint64_t cfg_hash, std::uint64_t seed);
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows,
                      std::uint64_t cfg_hash, std::uint64_t seed);
void write_ito_csv(const std::string& path, const std::vector<ItoReport>& reports,
                   std::uint64_t cfg_hash, std::uint64_t seed);
void write_regime_json(const std::string& path, const RegimeReport& report);

std::string format_double(double v); // shortest round-trip decimal form

} // namespace sdelab
