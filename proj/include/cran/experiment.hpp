#pragma once

// Multi-trial experiment driver: config validation, seeded trials over a
// grid of (algorithm, activated count, weight pair) cells, and the result
// artifacts written to disk.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cran/baselines.hpp"
#include "cran/metrics.hpp"
#include "cran/scenario.hpp"
#include "cran/sdql.hpp"
#include "json.hpp"

namespace YAML {
class Node;
}

namespace cran {

enum class Algorithm { kSdql, kActivation, kSleep };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct WeightPair {
  double w0 = 0.5;
  double w1 = 0.5;
};

struct ScenarioGrid {
  int rrh_count = 57;
  double inter_site_distance_m = 200.0;
  std::vector<int> activated_counts{11, 17, 22, 28, 34};
  RateProfile rates = RateProfile::standard();
  double min_ue_distance_m = 10.0;

  ScenarioParams params(int activated_count) const;
};

struct ExperimentConfig {
  RadioConfig radio;
  ScenarioGrid scenario;
  Hyperparams sdql;
  bool warm_start = false;  // carry Q-tables across the trials of a cell
  BaselineConfig baseline;
  int trials = 100;
  std::uint64_t base_seed = 1;
  std::string output_dir = "results";
  std::vector<WeightPair> sweep{{0.5, 0.5}};
  std::vector<Algorithm> algorithms{Algorithm::kSdql, Algorithm::kActivation,
                                    Algorithm::kSleep};
  bool write_traces = true;

  // Cross-field checks; throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fills defaults, rejects unknown keys, reports errors with their key path.
ExperimentConfig validate_config(const YAML::Node& doc);
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Inverse of ExperimentConfig::to_json, used when re-reading a manifest.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct Cell {
  Algorithm algorithm;
  int activated_count;
  WeightPair weights;

  std::string label() const;  // e.g. a11_w0.5_0.5
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg);

struct TrialOutcome {
  Cell cell;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<Scenario> scenario;
  std::optional<EpisodeTrace> trace;
  std::optional<TrialReport> report;
  std::string error;  // non-empty when the trial failed

  bool ok() const { return report.has_value(); }
};

// One trial; seed = base_seed + trial. Never throws: failures land in `error`.
TrialOutcome run_trial(const ExperimentConfig& cfg, const Cell& cell, int trial,
                       DeepQTable* warm_tables = nullptr);

Hyperparams hyperparams_for(const ExperimentConfig& cfg, WeightPair w);

// Seed-averaged statistics of one cell.
struct CellStats {
  Cell cell;
  int trials_ok = 0;
  int trials_failed = 0;
  std::optional<double> power_offset_db;
  std::optional<double> power_reduction_db;
  std::optional<double> interference_reduction_db;
  std::optional<double> interference_db;
  double throughput_loss_mbps = 0.0;
  double weak_to_central = 0.0;
  double central_to_weak = 0.0;
  double iterations = 0.0;
  double converged_fraction = 0.0;

  nlohmann::json to_json() const;
};

CellStats aggregate(const Cell& cell, const std::vector<TrialReport>& reports, int failed);

// Rows = metric, columns = cells, one block per algorithm.
std::string summary_csv(const std::vector<CellStats>& cells);

struct ExperimentResult {
  std::vector<CellStats> cells;
  std::vector<TrialOutcome> outcomes;  // cell-major, trial-minor
  std::string summary_csv;
};

// Worker count: CRAN_WORKERS if set, else hardware concurrency.
int worker_count();

// Runs every cell. Writes artifacts when `write` is true.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write = true);

// Rebuilds means, CDFs and summary.csv from the trial reports in `out_dir`.
std::vector<CellStats> summarize(const std::filesystem::path& out_dir);

// git blob SHA-1 of `text`.
std::string content_hash(const std::string& text);

// Re-runs the SDQL episode of a stored scenario with the cell's weights.
EpisodeResult replay_episode(const ExperimentConfig& cfg, const Scenario& scenario,
                             WeightPair weights);

}  // namespace cran
