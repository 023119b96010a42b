#pragma once

// Network-level averages in the dB domain, empirical CDFs, and the per-trial
// report assembled from the start and end states of a run.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cran/network_state.hpp"
#include "json.hpp"

namespace cran {

// A power-like average: the linear value always, the dB value when it is
// positive. A zero linear argument has no dB value.
struct DbAggregate {
  double linear = 0.0;
  std::optional<double> db;

  static DbAggregate from_linear(double linear);
};

// 10 log10( sum_b (P_max - P_b) / B ), OFF counting as 0 W.
DbAggregate avg_power_reduction(std::span<const PowerDbw> powers, double p_max_dbw);

// 10 log10( sum 10^(offset/10) / n ) over the finite offsets.
DbAggregate avg_power_offset(std::span<const double> offsets_db);

// For each victim UE, the sum over the other UEs' serving RRHs of
// (P_max - P_b'); averaged over victims, then divided by rrh_count.
DbAggregate avg_interference_reduction(std::span<const PowerDbw> powers, double p_max_dbw,
                                       std::span<const int> serving, int rrh_count);

// As above with P_b' in place of (P_max - P_b').
DbAggregate avg_interference(std::span<const PowerDbw> powers, std::span<const int> serving,
                             int rrh_count);

struct RatePair {
  double rate = 0.0;
  double desired = 0.0;
};

struct Transitions {
  int weak_to_central = 0;
  int central_to_weak = 0;
};

Transitions satisfaction_transitions(std::span<const RatePair> before,
                                     std::span<const RatePair> after);

struct CdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

// Sorted samples with probability i/n at the i-th order statistic.
// Throws std::invalid_argument on empty input.
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);

struct TrialReport {
  std::string algorithm;
  int activated_count = 0;
  double w0 = 0.0;
  double w1 = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;

  DbAggregate avg_power_reduction;
  DbAggregate avg_power_offset;
  DbAggregate avg_interference_reduction;
  DbAggregate avg_interference;
  double throughput_loss_total_mbps = 0.0;
  int weak_to_central = 0;
  int central_to_weak = 0;
  int iterations = 0;
  bool converged = true;

  // Per-UE samples for CDFs.
  std::vector<double> power_offset_db;          // P_max - P~ at the final interference
  std::vector<double> initial_offset_db;        // P - P~ at the start state
  std::vector<double> power_reduction_db;       // serving RRH, P_max - P_final
  std::vector<double> interference_reduction_w; // summed over the victim's interferers
  std::vector<double> throughput_loss_mbps;

  nlohmann::json to_json() const;
  static TrialReport from_json(const nlohmann::json& j);
};

// Builds every statistic from the state at the start of the run and the
// state it ended in (identical for the baselines).
TrialReport make_report(const NetworkState& start, const NetworkState& end, int iterations,
                        bool converged);

}  // namespace cran
