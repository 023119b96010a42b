// cran_sim: run, replay and summarize downlink power-management experiments.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cran/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, std::optional<int> trials,
            std::optional<long long> seed, std::optional<std::string> out,
            std::optional<std::string> algo, bool no_traces) {
  auto cfg = config_path.empty() ? cran::parse_config("") : cran::load_config(config_path);
  if (trials) cfg.trials = *trials;
  if (seed) {
    if (*seed < 0) throw cran::ConfigError("--seed: must be non-negative");
    cfg.base_seed = static_cast<std::uint64_t>(*seed);
  }
  if (out) cfg.output_dir = *out;
  if (algo) {
    if (*algo == "all") {
      cfg.algorithms = {cran::Algorithm::kSdql, cran::Algorithm::kActivation,
                        cran::Algorithm::kSleep};
    } else {
      cfg.algorithms = {cran::algorithm_from_string(*algo)};
    }
  }
  if (no_traces) cfg.write_traces = false;
  cfg.validate();

  const auto result = cran::run_experiment(cfg);
  int failed = 0;
  for (const auto& c : result.cells) failed += c.trials_failed;
  std::cout << result.summary_csv;
  std::cerr << "wrote " << cfg.output_dir << " (" << result.outcomes.size() << " trials, "
            << failed << " failed)\n";
  return 0;
}

int cmd_replay(const std::string& scenario_path, const std::string& trace_path,
               const std::string& config_path, std::optional<double> w0,
               const std::string& out_path) {
  auto cfg = config_path.empty() ? cran::parse_config("") : cran::load_config(config_path);
  const auto scenario = cran::scenario_from_json(nlohmann::json::parse(read_file(scenario_path)));
  cran::WeightPair w = cfg.sweep.front();
  if (w0) w = {*w0, 1.0 - *w0};

  const auto result = cran::replay_episode(cfg, scenario, w);
  std::ostringstream csv;
  result.trace.write_csv(csv);
  if (!out_path.empty()) {
    std::ofstream(out_path, std::ios::binary) << csv.str();
  }
  std::cout << result.trace.summary_json().dump() << "\n";
  if (trace_path.empty()) return 0;
  if (read_file(trace_path) == csv.str()) {
    std::cout << "trace matches " << trace_path << "\n";
    return 0;
  }
  std::cout << "trace differs from " << trace_path << "\n";
  return 1;
}

int cmd_summarize(const std::string& dir) {
  const auto stats = cran::summarize(dir);
  std::cout << cran::summary_csv(stats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-RAN downlink power management simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment sweep");
  std::string config_path;
  std::optional<int> trials;
  std::optional<long long> seed;
  std::optional<std::string> out, algo;
  bool no_traces = false;
  run->add_option("config", config_path, "YAML experiment config (defaults when omitted)");
  run->add_option("--trials", trials, "Trials per cell");
  run->add_option("--seed", seed, "Base seed; trial i uses seed + i");
  run->add_option("--out", out, "Output directory");
  run->add_option("--algo", algo, "Algorithm to run")
      ->check(CLI::IsMember({"sdql", "activation", "sleep", "all"}));
  run->add_flag("--no-traces", no_traces, "Skip per-trial episode traces");

  auto* replay = app.add_subcommand("replay", "Re-run the episode of a stored scenario");
  std::string scenario_path, trace_path, replay_config, replay_out;
  std::optional<double> w0;
  replay->add_option("scenario", scenario_path, "scenario.json from a trial directory")
      ->required();
  replay->add_option("--trace", trace_path, "trace.csv to compare against");
  replay->add_option("--config", replay_config, "Config the trial was run with");
  replay->add_option("--w0", w0, "Power weight (w1 = 1 - w0)")->check(CLI::Range(0.0, 1.0));
  replay->add_option("--out", replay_out, "Write the replayed trace here");

  auto* summarize = app.add_subcommand("summarize", "Aggregate existing trial directories");
  std::string dir;
  summarize->add_option("dir", dir, "Output directory of a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, trials, seed, out, algo, no_traces);
    if (*replay) return cmd_replay(scenario_path, trace_path, replay_config, w0, replay_out);
    if (*summarize) return cmd_summarize(dir);
  } catch (const cran::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
