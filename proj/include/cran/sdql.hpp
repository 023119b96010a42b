#pragma once

// Static deep Q-learning: one tabular Q-function per UE over floored RSRP
// states and a windowed set of integer-dB power reductions.

#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "cran/network_state.hpp"
#include "cran/radio_model.hpp"
#include "cran/scenario.hpp"
#include "json.hpp"

namespace cran {

struct Hyperparams {
  double alpha = 0.1;
  double lambda = 0.9;
  double epsilon = 0.1;
  double w0 = 0.5;  // weight on power reduction (dB)
  double w1 = 0.5;  // weight on throughput loss (Mb/s)
  int max_iterations = 100;
  int convergence_window = 10;  // consecutive zero-reward iterations to stop
  int window_len = 5;           // largest single reduction, dB
  int state_bound = 150;        // states span [-bound, bound] dBW
  double gamma_tolerance = 1e-9;

  void validate() const;
};

struct QuantizedState {
  int value = 0;
  friend bool operator==(const QuantizedState&, const QuantizedState&) = default;
};

QuantizedState quantize_state(double rsrp_dbw, int bound);
// OFF maps to the lowest state.
QuantizedState quantize_state(PowerDbw rsrp, int bound);

// Integer reductions allowed by the offset, capped by the window.
std::vector<int> available_actions(double offset_db, int window);

class QTable {
 public:
  QTable(int state_bound, int window);

  int state_bound() const { return bound_; }
  int window() const { return window_; }

  double at(QuantizedState s, int action) const { return q_[index(s, action)]; }
  double& at(QuantizedState s, int action) { return q_[index(s, action)]; }
  double max_over(QuantizedState s, std::span<const int> actions) const;

  std::span<const double> values() const { return q_; }
  std::span<double> values() { return q_; }

 private:
  std::size_t index(QuantizedState s, int action) const;
  int bound_;
  int window_;
  std::vector<double> q_;
};

// One QTable per UE, all with the same shape.
class DeepQTable {
 public:
  DeepQTable(int ue_count, int state_bound, int window);

  int ue_count() const { return static_cast<int>(tables_.size()); }
  int state_bound() const { return tables_.front().state_bound(); }
  int window() const { return tables_.front().window(); }
  QTable& table(int ue) { return tables_.at(ue); }
  const QTable& table(int ue) const { return tables_.at(ue); }

  nlohmann::json to_json() const;
  static DeepQTable from_json(const nlohmann::json& j);

 private:
  std::vector<QTable> tables_;
};

// Epsilon-greedy over `actions`. Exploitation breaks exact ties toward the
// largest reduction.
int select_action(const QTable& q, QuantizedState s, std::span<const int> actions,
                  double epsilon, std::mt19937_64& rng);

// (eps / |A|) * (1 - eps), reported as-is; the simulator does not use it.
double transition_probability(double epsilon, int action_set_size);

double reward(double delta_p_db, double delta_r_mbps, double w0, double w1);

void q_update(QTable& q, QuantizedState s, int action, double reward,
              QuantizedState next, std::span<const int> next_actions, double alpha,
              double lambda);

struct StepRecord {
  int iteration = 0;  // 1-based
  int ue = 0;
  double offset_db = 0.0;
  int action = 0;            // selected reduction, dB
  double applied_db = 0.0;   // differs from action only at the numeric floor
  double delta_r_mbps = 0.0;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  std::vector<double> gamma;  // per iteration
  int iterations = 0;
  bool converged = false;  // stopped by the zero-reward rule
  int floor_breaches = 0;

  void write_csv(std::ostream& os) const;
  nlohmann::json summary_json() const;
};

struct EpisodeResult {
  EpisodeTrace trace;
  NetworkState final_state;
};

// Lowest power an RRH can be reduced to.
double power_floor_dbw(const RadioConfig& cfg);

// Runs the episode from `initial` (normally every serving RRH at P_max).
EpisodeResult run_episode(NetworkState initial, const Hyperparams& hp, DeepQTable& tables,
                          std::mt19937_64& rng);

EpisodeResult run_episode(const Scenario& scenario, const RadioConfig& cfg,
                          const Hyperparams& hp, DeepQTable& tables, std::mt19937_64& rng);

}  // namespace cran
