#include "cran/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

namespace cran {

namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSdql: return "sdql";
    case Algorithm::kActivation: return "activation";
    case Algorithm::kSleep: return "sleep";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "sdql") return Algorithm::kSdql;
  if (name == "activation") return Algorithm::kActivation;
  if (name == "sleep") return Algorithm::kSleep;
  throw ConfigError("unknown algorithm '" + name + "' (expected sdql, activation or sleep)");
}

ScenarioParams ScenarioGrid::params(int activated_count) const {
  ScenarioParams p;
  p.rrh_count = rrh_count;
  p.inter_site_distance_m = inter_site_distance_m;
  p.activated_count = activated_count;
  p.rates = rates;
  p.min_ue_distance_m = min_ue_distance_m;
  return p;
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  try {
    radio.validate();
    sdql.validate();
    baseline.validate(radio);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (trials < 1) throw ConfigError("trials: must be >= 1");
  if (scenario.rrh_count < 1) throw ConfigError("scenario.rrh_count: must be >= 1");
  if (!(scenario.inter_site_distance_m > 0)) {
    throw ConfigError("scenario.inter_site_distance_m: must be positive");
  }
  if (!(scenario.min_ue_distance_m > 0)) {
    throw ConfigError("scenario.min_ue_distance_m: must be positive");
  }
  if (scenario.activated_counts.empty()) {
    throw ConfigError("scenario.activated_counts: must not be empty");
  }
  for (std::size_t i = 0; i < scenario.activated_counts.size(); ++i) {
    const int a = scenario.activated_counts[i];
    if (a < 1 || a > scenario.rrh_count) {
      throw ConfigError(fmt::format("scenario.activated_counts[{}]: {} outside [1, {}]", i, a,
                                    scenario.rrh_count));
    }
  }
  if (scenario.rates.support_bps.empty()) throw ConfigError("scenario.rates_mbps: empty");
  for (std::size_t i = 0; i < scenario.rates.support_bps.size(); ++i) {
    if (!(scenario.rates.support_bps[i] > 0)) {
      throw ConfigError(fmt::format("scenario.rates_mbps[{}]: must be positive", i));
    }
  }
  if (sweep.empty()) throw ConfigError("weights: must not be empty");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& w = sweep[i];
    if (!(w.w0 >= 0 && w.w1 >= 0) || std::abs(w.w0 + w.w1 - 1.0) > 1e-9) {
      throw ConfigError(fmt::format(
          "weights[{}]: ({}, {}) must be non-negative and sum to 1", i, w.w0, w.w1));
    }
  }
  if (algorithms.empty()) throw ConfigError("algorithms: must not be empty");
}

namespace {

template <typename T>
constexpr const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(join(path, key) + ": unknown key");
  }
}

template <typename T>
T convert(const YAML::Node& n, const std::string& where) {
  if (!n.IsScalar()) throw ConfigError(where + ": expected " + type_name<T>());
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": expected " + type_name<T>() + ", got '" + n.Scalar() + "'");
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, const std::string& path, T& out) {
  const YAML::Node n = map[key];
  if (!n) return;
  out = convert<T>(n, join(path, key));
}

template <typename T>
std::vector<T> read_list(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) throw ConfigError(where + ": expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(convert<T>(n[i], fmt::format("{}[{}]", where, i)));
  }
  return out;
}

}  // namespace

ExperimentConfig validate_config(const YAML::Node& doc) {
  ExperimentConfig cfg;
  if (!doc || doc.IsNull()) {
    cfg.validate();
    return cfg;
  }
  check_keys(doc, "", {"radio", "scenario", "sdql", "weights", "baseline", "trials",
                       "base_seed", "output_dir", "algorithms", "write_traces"});

  if (const auto n = doc["radio"]) {
    check_keys(n, "radio", {"p_max_dbw", "noise_dbw", "bandwidth_hz", "tx_gain_dbi",
                            "center_freq_hz", "speed_of_light_mps", "pathloss_exponent"});
    auto& r = cfg.radio;
    read(n, "p_max_dbw", "radio", r.p_max_dbw);
    read(n, "noise_dbw", "radio", r.noise_dbw);
    read(n, "bandwidth_hz", "radio", r.bandwidth_hz);
    read(n, "tx_gain_dbi", "radio", r.tx_gain_dbi);
    read(n, "center_freq_hz", "radio", r.center_freq_hz);
    read(n, "speed_of_light_mps", "radio", r.speed_of_light_mps);
    read(n, "pathloss_exponent", "radio", r.pathloss_exponent);
  }

  if (const auto n = doc["scenario"]) {
    check_keys(n, "scenario", {"rrh_count", "inter_site_distance_m", "activated_counts",
                               "rates_mbps", "min_ue_distance_m"});
    auto& s = cfg.scenario;
    read(n, "rrh_count", "scenario", s.rrh_count);
    read(n, "inter_site_distance_m", "scenario", s.inter_site_distance_m);
    read(n, "min_ue_distance_m", "scenario", s.min_ue_distance_m);
    if (const auto a = n["activated_counts"]) {
      s.activated_counts = read_list<int>(a, "scenario.activated_counts");
    }
    if (const auto r = n["rates_mbps"]) {
      s.rates.support_bps.clear();
      for (double mbps : read_list<double>(r, "scenario.rates_mbps")) {
        s.rates.support_bps.push_back(mbps * 1e6);
      }
    }
  }

  if (const auto n = doc["sdql"]) {
    check_keys(n, "sdql", {"alpha", "lambda", "epsilon", "max_iterations",
                           "convergence_window", "window_len", "state_bound",
                           "gamma_tolerance", "warm_start"});
    auto& h = cfg.sdql;
    read(n, "alpha", "sdql", h.alpha);
    read(n, "lambda", "sdql", h.lambda);
    read(n, "epsilon", "sdql", h.epsilon);
    read(n, "max_iterations", "sdql", h.max_iterations);
    read(n, "convergence_window", "sdql", h.convergence_window);
    read(n, "window_len", "sdql", h.window_len);
    read(n, "state_bound", "sdql", h.state_bound);
    read(n, "gamma_tolerance", "sdql", h.gamma_tolerance);
    read(n, "warm_start", "sdql", cfg.warm_start);
  }

  if (const auto n = doc["weights"]) {
    if (!n.IsSequence()) throw ConfigError("weights: expected a list of [w0, w1] pairs");
    cfg.sweep.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto where = fmt::format("weights[{}]", i);
      const auto pair = read_list<double>(n[i], where);
      if (pair.size() != 2) throw ConfigError(where + ": expected [w0, w1]");
      cfg.sweep.push_back({pair[0], pair[1]});
    }
  }

  if (const auto n = doc["baseline"]) {
    check_keys(n, "baseline", {"sleep_power_dbw"});
    if (const auto p = n["sleep_power_dbw"]) {
      if (p.IsScalar() && p.Scalar() == "off") {
        cfg.baseline.sleep_power = PowerDbw::off();
      } else {
        cfg.baseline.sleep_power =
            PowerDbw::dbw(convert<double>(p, "baseline.sleep_power_dbw"));
      }
    }
  }

  read(doc, "trials", "", cfg.trials);
  if (const auto n = doc["base_seed"]) {
    const auto seed = convert<long long>(n, "base_seed");
    if (seed < 0) throw ConfigError("base_seed: must be non-negative");
    cfg.base_seed = static_cast<std::uint64_t>(seed);
  }
  read(doc, "output_dir", "", cfg.output_dir);
  read(doc, "write_traces", "", cfg.write_traces);
  if (const auto n = doc["algorithms"]) {
    cfg.algorithms.clear();
    std::vector<std::string> names =
        n.IsScalar() ? std::vector<std::string>{n.Scalar()}
                     : read_list<std::string>(n, "algorithms");
    for (const auto& name : names) {
      if (name == "all") {
        cfg.algorithms = {Algorithm::kSdql, Algorithm::kActivation, Algorithm::kSleep};
        break;
      }
      try {
        cfg.algorithms.push_back(algorithm_from_string(name));
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("algorithms: ") + e.what());
      }
    }
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: malformed document: ") + e.what());
  }
  return validate_config(doc);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json ExperimentConfig::to_json() const {
  std::vector<double> rates_mbps;
  for (double r : scenario.rates.support_bps) rates_mbps.push_back(r / 1e6);
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : sweep) weights.push_back({w.w0, w.w1});
  std::vector<std::string> algos;
  for (auto a : algorithms) algos.push_back(to_string(a));
  nlohmann::json base = nlohmann::json::object();
  if (baseline.sleep_power) {
    base["sleep_power_dbw"] = baseline.sleep_power->is_off()
                                  ? nlohmann::json("off")
                                  : nlohmann::json(baseline.sleep_power->value());
  }
  return {
      {"radio",
       {{"p_max_dbw", radio.p_max_dbw},
        {"noise_dbw", radio.noise_dbw},
        {"bandwidth_hz", radio.bandwidth_hz},
        {"tx_gain_dbi", radio.tx_gain_dbi},
        {"center_freq_hz", radio.center_freq_hz},
        {"speed_of_light_mps", radio.speed_of_light_mps},
        {"pathloss_exponent", radio.pathloss_exponent}}},
      {"scenario",
       {{"rrh_count", scenario.rrh_count},
        {"inter_site_distance_m", scenario.inter_site_distance_m},
        {"activated_counts", scenario.activated_counts},
        {"rates_mbps", rates_mbps},
        {"min_ue_distance_m", scenario.min_ue_distance_m}}},
      {"sdql",
       {{"alpha", sdql.alpha},
        {"lambda", sdql.lambda},
        {"epsilon", sdql.epsilon},
        {"max_iterations", sdql.max_iterations},
        {"convergence_window", sdql.convergence_window},
        {"window_len", sdql.window_len},
        {"state_bound", sdql.state_bound},
        {"gamma_tolerance", sdql.gamma_tolerance},
        {"warm_start", warm_start}}},
      {"weights", weights},
      {"baseline", base},
      {"trials", trials},
      {"base_seed", base_seed},
      {"output_dir", output_dir},
      {"algorithms", algos},
      {"write_traces", write_traces},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  // JSON is a subset of YAML's flow syntax.
  return parse_config(j.dump());
}

// ---------------------------------------------------------------------------
// Trials

std::string Cell::label() const {
  return fmt::format("a{}_w{}_{}", activated_count, weights.w0, weights.w1);
}

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (auto algo : cfg.algorithms) {
    for (int count : cfg.scenario.activated_counts) {
      for (const auto& w : cfg.sweep) cells.push_back({algo, count, w});
    }
  }
  return cells;
}

Hyperparams hyperparams_for(const ExperimentConfig& cfg, WeightPair w) {
  Hyperparams hp = cfg.sdql;
  hp.w0 = w.w0;
  hp.w1 = w.w1;
  return hp;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, const Cell& cell, int trial,
                       DeepQTable* warm_tables) {
  TrialOutcome out;
  out.cell = cell;
  out.trial = trial;
  out.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  try {
    out.scenario = build_scenario(cfg.scenario.params(cell.activated_count), cfg.radio, out.seed);
    const Scenario& sc = *out.scenario;
    TrialReport report;
    switch (cell.algorithm) {
      case Algorithm::kSdql: {
        const auto hp = hyperparams_for(cfg, cell.weights);
        std::optional<DeepQTable> fresh;
        DeepQTable* tables = warm_tables;
        if (tables == nullptr) {
          fresh.emplace(sc.ue_count(), hp.state_bound, hp.window_len);
          tables = &*fresh;
        }
        auto rng = make_rng(out.seed, kEpisodeStream);
        const NetworkState start(cfg.radio, sc);
        auto result = run_episode(start, hp, *tables, rng);
        report = make_report(start, result.final_state, result.trace.iterations,
                             result.trace.converged);
        out.trace = std::move(result.trace);
        break;
      }
      case Algorithm::kActivation: {
        const auto state = activation_scheme(sc, cfg.radio);
        report = make_report(state, state, 0, true);
        break;
      }
      case Algorithm::kSleep: {
        const auto state = sleep_scheme(sc, cfg.radio, cfg.baseline);
        report = make_report(state, state, 0, true);
        break;
      }
    }
    report.algorithm = to_string(cell.algorithm);
    report.activated_count = cell.activated_count;
    report.w0 = cell.weights.w0;
    report.w1 = cell.weights.w1;
    report.trial = trial;
    report.seed = out.seed;
    out.report = std::move(report);
  } catch (const std::exception& e) {
    out.report.reset();
    out.error = e.what();
  }
  return out;
}

EpisodeResult replay_episode(const ExperimentConfig& cfg, const Scenario& scenario,
                             WeightPair weights) {
  const auto hp = hyperparams_for(cfg, weights);
  DeepQTable tables(scenario.ue_count(), hp.state_bound, hp.window_len);
  auto rng = make_rng(scenario.seed, kEpisodeStream);
  return run_episode(scenario, cfg.radio, hp, tables, rng);
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

std::optional<double> mean_db(const std::vector<TrialReport>& reports,
                              DbAggregate TrialReport::*field) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : reports) {
    if (const auto& db = (r.*field).db) {
      sum += *db;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

std::string fmt_value(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("off");
}

}  // namespace

CellStats aggregate(const Cell& cell, const std::vector<TrialReport>& reports, int failed) {
  CellStats s;
  s.cell = cell;
  s.trials_ok = static_cast<int>(reports.size());
  s.trials_failed = failed;
  s.power_offset_db = mean_db(reports, &TrialReport::avg_power_offset);
  s.power_reduction_db = mean_db(reports, &TrialReport::avg_power_reduction);
  s.interference_reduction_db = mean_db(reports, &TrialReport::avg_interference_reduction);
  s.interference_db = mean_db(reports, &TrialReport::avg_interference);
  if (reports.empty()) return s;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    s.throughput_loss_mbps += r.throughput_loss_total_mbps / n;
    s.weak_to_central += r.weak_to_central / n;
    s.central_to_weak += r.central_to_weak / n;
    s.iterations += r.iterations / n;
    s.converged_fraction += (r.converged ? 1.0 : 0.0) / n;
  }
  return s;
}

nlohmann::json CellStats::to_json() const {
  return {{"algorithm", to_string(cell.algorithm)},
          {"activated_count", cell.activated_count},
          {"w0", cell.weights.w0},
          {"w1", cell.weights.w1},
          {"trials_ok", trials_ok},
          {"trials_failed", trials_failed},
          {"power_offset_db", opt_json(power_offset_db)},
          {"power_reduction_db", opt_json(power_reduction_db)},
          {"interference_reduction_db", opt_json(interference_reduction_db)},
          {"interference_db", opt_json(interference_db)},
          {"throughput_loss_mbps", throughput_loss_mbps},
          {"weak_to_central", weak_to_central},
          {"central_to_weak", central_to_weak},
          {"iterations", iterations},
          {"converged_fraction", converged_fraction}};
}

std::string summary_csv(const std::vector<CellStats>& cells) {
  std::vector<Algorithm> algos;
  for (const auto& c : cells) {
    if (std::find(algos.begin(), algos.end(), c.cell.algorithm) == algos.end()) {
      algos.push_back(c.cell.algorithm);
    }
  }
  using Row = std::pair<const char*, std::function<std::string(const CellStats&)>>;
  const std::vector<Row> rows{
      {"power_offset_db", [](const CellStats& s) { return fmt_value(s.power_offset_db); }},
      {"power_reduction_db", [](const CellStats& s) { return fmt_value(s.power_reduction_db); }},
      {"interference_reduction_db",
       [](const CellStats& s) { return fmt_value(s.interference_reduction_db); }},
      {"interference_db", [](const CellStats& s) { return fmt_value(s.interference_db); }},
      {"throughput_loss_mbps",
       [](const CellStats& s) { return fmt::format("{:.6f}", s.throughput_loss_mbps); }},
      {"weak_to_central",
       [](const CellStats& s) { return fmt::format("{:.6f}", s.weak_to_central); }},
      {"central_to_weak",
       [](const CellStats& s) { return fmt::format("{:.6f}", s.central_to_weak); }},
      {"iterations", [](const CellStats& s) { return fmt::format("{:.6f}", s.iterations); }},
      {"converged_fraction",
       [](const CellStats& s) { return fmt::format("{:.6f}", s.converged_fraction); }},
      {"trials_ok", [](const CellStats& s) { return std::to_string(s.trials_ok); }},
      {"trials_failed", [](const CellStats& s) { return std::to_string(s.trials_failed); }},
  };

  std::string out;
  for (auto algo : algos) {
    std::vector<const CellStats*> cols;
    for (const auto& c : cells) {
      if (c.cell.algorithm == algo) cols.push_back(&c);
    }
    out += "algorithm,metric";
    for (const auto* c : cols) out += "," + c->cell.label();
    out += "\n";
    for (const auto& [name, value] : rows) {
      out += to_string(algo) + "," + name;
      for (const auto* c : cols) out += "," + value(*c);
      out += "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path cell_dir(const fs::path& root, const Cell& cell) {
  return root / "cells" / to_string(cell.algorithm) / cell.label();
}

fs::path trial_dir(const fs::path& root, const Cell& cell, int trial) {
  return cell_dir(root, cell) / fmt::format("trial_{:04d}", trial);
}

void write_cdf(const fs::path& path, const std::vector<double>& samples) {
  std::string text = "value,probability\n";
  if (!samples.empty()) {
    for (const auto& p : empirical_cdf(samples)) {
      text += fmt::format("{},{}\n", p.value, p.probability);
    }
  }
  write_text(path, text);
}

void write_cell_files(const fs::path& dir, const CellStats& stats,
                      const std::vector<TrialReport>& reports) {
  fs::create_directories(dir);
  write_text(dir / "means.json", stats.to_json().dump(2) + "\n");
  std::vector<double> offset, reduction, interference_cut, loss, iterations, w2c;
  for (const auto& r : reports) {
    offset.insert(offset.end(), r.power_offset_db.begin(), r.power_offset_db.end());
    reduction.insert(reduction.end(), r.power_reduction_db.begin(), r.power_reduction_db.end());
    for (double w : r.interference_reduction_w) {
      if (w > 0) interference_cut.push_back(10.0 * std::log10(w));
    }
    loss.push_back(r.throughput_loss_total_mbps);
    iterations.push_back(r.iterations);
    w2c.push_back(r.weak_to_central);
  }
  write_cdf(dir / "cdf_power_offset_db.csv", offset);
  write_cdf(dir / "cdf_power_reduction_db.csv", reduction);
  write_cdf(dir / "cdf_interference_reduction_db.csv", interference_cut);
  write_cdf(dir / "cdf_throughput_loss_mbps.csv", loss);
  write_cdf(dir / "cdf_iterations.csv", iterations);
  write_cdf(dir / "cdf_weak_to_central.csv", w2c);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("content_hash: digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int worker_count() {
  if (const char* env = std::getenv("CRAN_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("CRAN_WORKERS: expected a positive integer, got '") + env +
                      "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write) {
  cfg.validate();
  const auto cells = expand_cells(cfg);
  const int trials = cfg.trials;

  // A task is one trial, or a whole cell when Q-tables carry across trials.
  struct Task {
    std::size_t cell;
    int trial;  // -1: every trial of the cell, in order
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cfg.warm_start && cells[c].algorithm == Algorithm::kSdql) {
      tasks.push_back({c, -1});
    } else {
      for (int t = 0; t < trials; ++t) tasks.push_back({c, t});
    }
  }

  std::vector<TrialOutcome> outcomes(cells.size() * trials);
  auto slot = [&](std::size_t c, int t) -> TrialOutcome& { return outcomes[c * trials + t]; };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& task = tasks[i];
      const Cell& cell = cells[task.cell];
      if (task.trial >= 0) {
        slot(task.cell, task.trial) = run_trial(cfg, cell, task.trial);
        continue;
      }
      std::optional<DeepQTable> tables;
      for (int t = 0; t < trials; ++t) {
        if (!tables) {
          tables.emplace(cell.activated_count, cfg.sdql.state_bound, cfg.sdql.window_len);
        }
        slot(task.cell, t) = run_trial(cfg, cell, t, &*tables);
      }
    }
  };
  const int n_workers = std::min<int>(worker_count(), static_cast<int>(tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult result;
  std::vector<std::vector<TrialReport>> per_cell(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int failed = 0;
    for (int t = 0; t < trials; ++t) {
      const auto& o = slot(c, t);
      if (o.ok()) per_cell[c].push_back(*o.report);
      else ++failed;
    }
    result.cells.push_back(aggregate(cells[c], per_cell[c], failed));
  }
  result.summary_csv = summary_csv(result.cells);

  if (write) {
    const fs::path root = cfg.output_dir;
    fs::create_directories(root);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (int t = 0; t < trials; ++t) {
        const auto& o = slot(c, t);
        const auto dir = trial_dir(root, cells[c], t);
        fs::create_directories(dir);
        if (o.scenario) write_text(dir / "scenario.json", scenario_to_json(*o.scenario).dump(2) + "\n");
        if (o.ok()) {
          fs::remove(dir / "error.json");
          write_text(dir / "report.json", o.report->to_json().dump(2) + "\n");
        } else {
          fs::remove(dir / "report.json");
          write_text(dir / "error.json",
                     nlohmann::json{{"trial", t}, {"seed", o.seed}, {"error", o.error}}.dump(2) +
                         "\n");
        }
        if (o.trace && cfg.write_traces) {
          std::ostringstream csv;
          o.trace->write_csv(csv);
          write_text(dir / "trace.csv", csv.str());
          write_text(dir / "trace_summary.json", o.trace->summary_json().dump(2) + "\n");
        }
      }
      write_cell_files(cell_dir(root, cells[c]), result.cells[c], per_cell[c]);
    }
    write_text(root / "summary.csv", result.summary_csv);

    const auto config_json = cfg.to_json();
    nlohmann::json cell_labels = nlohmann::json::array();
    for (const auto& c : cells) cell_labels.push_back(to_string(c.algorithm) + "/" + c.label());
    const nlohmann::json manifest{{"tool", "cran_sim"},
                                  {"created_utc", utc_timestamp()},
                                  {"config", config_json},
                                  {"config_hash", content_hash(config_json.dump())},
                                  {"cells", cell_labels}};
    write_text(root / "manifest.json", manifest.dump(2) + "\n");
  }

  result.outcomes = std::move(outcomes);
  return result;
}

std::vector<CellStats> summarize(const fs::path& out_dir) {
  std::ifstream in(out_dir / "manifest.json");
  if (!in) throw std::runtime_error("summarize: no manifest.json in " + out_dir.string());
  const auto manifest = nlohmann::json::parse(in);
  const auto cfg = config_from_json(manifest.at("config"));

  std::vector<CellStats> stats;
  for (const auto& cell : expand_cells(cfg)) {
    std::vector<TrialReport> reports;
    int failed = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto path = trial_dir(out_dir, cell, t) / "report.json";
      std::ifstream rin(path);
      if (!rin) {
        ++failed;
        continue;
      }
      reports.push_back(TrialReport::from_json(nlohmann::json::parse(rin)));
    }
    stats.push_back(aggregate(cell, reports, failed));
    write_cell_files(cell_dir(out_dir, cell), stats.back(), reports);
  }
  write_text(out_dir / "summary.csv", summary_csv(stats));
  return stats;
}

}  // namespace cran
