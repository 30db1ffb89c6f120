#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "renyi/data.hpp"
#include "renyi/fairtrain.hpp"
#include "renyi/metrics.hpp"

namespace renyi::harness {

enum class ScenarioKind { toy, arctan, csv };

struct CsvSchema {
  std::vector<std::string> x_cols;
  std::vector<std::string> s_cols;
  std::string y_col;
  Task task = Task::binary;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::toy;
  std::string csv_path;  // only for csv
  CsvSchema schema;      // only for csv
  int n = 20000;         // synthetic sample count
  double bias_scale = 2.0;  // arctan planted-bias strength
  double test_fraction = 0.2;
};

struct ExperimentConfig {
  std::string preset;  // empty when none was given
  ScenarioConfig scenario;
  fair::FairTrainConfig train;
  std::vector<std::string> metrics;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  metrics::HgrNnConfig estimator;
  int kde_bins = 32;
  int fairquant_quantiles = 50;

  void validate() const;
  // Semantic fields only, in a fixed order; the output directory is excluded.
  std::string canonical() const;
  std::uint64_t fingerprint() const;
  fair::EvalOptions eval_options() const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.canonical() == b.canonical() && a.output_dir == b.output_dir && a.preset == b.preset;
  }
};

// Known preset names, in documentation order.
const std::vector<std::string>& preset_names();
// Defaults for a named preset; throws ErrorKind::config for unknown names.
ExperimentConfig preset(const std::string& name);

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct IngestResult {
  Dataset data;
  std::size_t dropped_rows = 0;
  double y_mean = 0.0;  // subtracted from y for regression tasks
};

struct CsvColumns {
  SampleMatrix values;  // one column per requested name, in request order
  std::size_t dropped_rows = 0;
};

// Named numeric columns of a headed CSV; rows with an empty or NA cell in any
// requested column are dropped and counted.
CsvColumns read_csv_columns(const std::filesystem::path& path, const std::vector<std::string>& names);

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema);
// A header row plus one row per sample, columns x_0.., s_0.., y.
void write_csv(const std::filesystem::path& path, const Dataset& data);

Dataset load_scenario(const ScenarioConfig& scenario, std::uint64_t seed);

struct RunRecord {
  std::string run_id;
  std::uint64_t fingerprint = 0;
  std::string version;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double runtime_seconds = 0.0;
  fair::FairRunResult result;
};

struct AggregateRow {
  double lambda = 0.0;
  int runs = 0;
  int succeeded = 0;
  std::vector<std::pair<std::string, double>> mean;
  std::vector<std::pair<std::string, double>> std;  // sample standard deviation
};

std::string version_string();

// Worker count: RENYI_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// One record per (lambda, seed) pair, lambda-major, in config order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);
// Per-lambda mean and sample std over successful runs, computed from the
// values as printed in runs.csv so the file alone reproduces them.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

// runs.csv, summary.json, config.yaml, epochs_<run>.csv and timing.csv under
// `dir`. Everything except timing.csv is a pure function of config and seeds.
void emit_reports(const std::vector<RunRecord>& records, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir);

// Six significant digits, "nan" for missing values.
std::string format_number(double value);

}  // namespace renyi::harness
