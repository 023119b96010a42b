#include "cran/sdql.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace cran {

namespace {

// Offsets within this many dB below an integer are floored up to it.
constexpr double kOffsetSnapDb = 1e-9;

}  // namespace

void Hyperparams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("sdql." + field + ": " + why);
  };
  if (!(alpha > 0 && alpha <= 1)) fail("alpha", "must be in (0, 1]");
  if (!(lambda >= 0 && lambda <= 1)) fail("lambda", "must be in [0, 1]");
  if (!(epsilon >= 0 && epsilon < 1)) fail("epsilon", "must be in [0, 1)");
  if (!(w0 >= 0)) fail("w0", "must be >= 0");
  if (!(w1 >= 0)) fail("w1", "must be >= 0");
  if (std::abs(w0 + w1 - 1.0) > 1e-9) fail("w0", "w0 + w1 must equal 1");
  if (max_iterations < 1) fail("max_iterations", "must be >= 1");
  if (convergence_window < 1) fail("convergence_window", "must be >= 1");
  if (window_len < 1) fail("window_len", "must be >= 1");
  if (state_bound < 1) fail("state_bound", "must be >= 1");
  if (!(gamma_tolerance >= 0)) fail("gamma_tolerance", "must be >= 0");
}

QuantizedState quantize_state(double rsrp_dbw, int bound) {
  if (std::isnan(rsrp_dbw)) return QuantizedState{-bound};
  const double f = std::floor(rsrp_dbw);
  return QuantizedState{static_cast<int>(std::clamp(f, double(-bound), double(bound)))};
}

QuantizedState quantize_state(PowerDbw rsrp, int bound) {
  if (rsrp.is_off()) return QuantizedState{-bound};
  return quantize_state(rsrp.value(), bound);
}

std::vector<int> available_actions(double offset_db, int window) {
  int top = 0;
  if (offset_db > 0) {
    top = std::isinf(offset_db)
              ? window
              : static_cast<int>(std::min<double>(window, std::floor(offset_db + kOffsetSnapDb)));
  }
  std::vector<int> actions(top + 1);
  for (int a = 0; a <= top; ++a) actions[a] = a;
  return actions;
}

QTable::QTable(int state_bound, int window)
    : bound_(state_bound),
      window_(window),
      q_(static_cast<std::size_t>(2 * state_bound + 1) * (window + 1), 0.0) {
  if (state_bound < 1 || window < 1) throw std::invalid_argument("QTable: bad shape");
}

std::size_t QTable::index(QuantizedState s, int action) const {
  if (s.value < -bound_ || s.value > bound_ || action < 0 || action > window_) {
    throw std::out_of_range(fmt::format("QTable: ({}, {}) outside table", s.value, action));
  }
  return static_cast<std::size_t>(s.value + bound_) * (window_ + 1) + action;
}

double QTable::max_over(QuantizedState s, std::span<const int> actions) const {
  double best = at(s, actions.front());
  for (int a : actions.subspan(1)) best = std::max(best, at(s, a));
  return best;
}

DeepQTable::DeepQTable(int ue_count, int state_bound, int window) {
  if (ue_count < 1) throw std::invalid_argument("DeepQTable: need at least one UE");
  tables_.assign(ue_count, QTable(state_bound, window));
}

nlohmann::json DeepQTable::to_json() const {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : tables_) {
    tables.push_back(std::vector<double>(t.values().begin(), t.values().end()));
  }
  return {{"state_bound", state_bound()}, {"window", window()}, {"tables", tables}};
}

DeepQTable DeepQTable::from_json(const nlohmann::json& j) {
  const int bound = j.at("state_bound").get<int>();
  const int window = j.at("window").get<int>();
  const auto& tables = j.at("tables");
  DeepQTable dq(static_cast<int>(tables.size()), bound, window);
  for (std::size_t u = 0; u < tables.size(); ++u) {
    const auto values = tables[u].get<std::vector<double>>();
    auto dst = dq.tables_[u].values();
    if (values.size() != dst.size()) {
      throw std::invalid_argument("DeepQTable json: table " + std::to_string(u) +
                                  " has the wrong size");
    }
    std::copy(values.begin(), values.end(), dst.begin());
  }
  return dq;
}

int select_action(const QTable& q, QuantizedState s, std::span<const int> actions,
                   double epsilon, std::mt19937_64& rng) {
  if (actions.empty()) throw std::invalid_argument("select_action: empty action set");
  if (actions.size() == 1) return actions.front();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
    return actions[pick(rng)];
  }
  int best = actions.front();
  double best_q = q.at(s, best);
  for (int a : actions.subspan(1)) {
    const double v = q.at(s, a);
    if (v > best_q || (v == best_q && a > best)) {
      best = a;
      best_q = v;
    }
  }
  return best;
}

double transition_probability(double epsilon, int action_set_size) {
  if (action_set_size < 1) {
    throw std::invalid_argument("transition_probability: empty action set");
  }
  return (epsilon * (1.0 / action_set_size)) * (1.0 - epsilon);
}

double reward(double delta_p_db, double delta_r_mbps, double w0, double w1) {
  return w0 * delta_p_db - w1 * delta_r_mbps;
}

void q_update(QTable& q, QuantizedState s, int action, double r, QuantizedState next,
              std::span<const int> next_actions, double alpha, double lambda) {
  if (next_actions.empty()) throw std::invalid_argument("q_update: empty next action set");
  double& cell = q.at(s, action);
  cell += alpha * (r + lambda * q.max_over(next, next_actions) - cell);
}

void EpisodeTrace::write_csv(std::ostream& os) const {
  os << "k,u,offset_db,action_db,delta_r_mbps,reward\n";
  for (const auto& s : steps) {
    os << fmt::format("{},{},{},{},{},{}\n", s.iteration, s.ue, s.offset_db, s.applied_db,
                      s.delta_r_mbps, s.reward);
  }
}

nlohmann::json EpisodeTrace::summary_json() const {
  return {{"iterations", iterations},
          {"converged", converged},
          {"floor_breaches", floor_breaches},
          {"gamma", gamma}};
}

double power_floor_dbw(const RadioConfig& cfg) { return cfg.noise_dbw - 30.0; }

EpisodeResult run_episode(NetworkState state, const Hyperparams& hp, DeepQTable& tables,
                          std::mt19937_64& rng) {
  hp.validate();
  if (tables.ue_count() != state.ue_count() || tables.window() != hp.window_len ||
      tables.state_bound() != hp.state_bound) {
    throw std::invalid_argument("run_episode: deep Q-table shape does not match");
  }
  const double floor_dbw = power_floor_dbw(state.radio());
  const int ues = state.ue_count();

  EpisodeTrace trace;
  int zero_run = 0;
  for (int n = 1; n <= hp.max_iterations; ++n) {
    double gamma = 0.0;
    for (int u = 0; u < ues; ++u) {
      const int b = state.serving_rrh(u);
      QTable& q = tables.table(u);

      const double offset = state.power_offset(u);
      const auto actions = available_actions(offset, hp.window_len);
      const auto s = quantize_state(state.rsrp(u).level, hp.state_bound);
      const int action = select_action(q, s, actions, hp.epsilon, rng);

      const double rate_before = state.throughput(u);
      double applied = 0.0;
      if (action > 0) {
        const double from = state.power(b).value();
        double to = from - action;
        if (to < floor_dbw) {
          to = floor_dbw;
          ++trace.floor_breaches;
        }
        state.set_power(b, PowerDbw::dbw(to));
        applied = from - to;
      }
      const double delta_r = (rate_before - state.throughput(u)) / 1e6;
      const double q_val = reward(applied, delta_r, hp.w0, hp.w1);

      const auto next = quantize_state(state.rsrp(u).level, hp.state_bound);
      const auto next_actions = available_actions(state.power_offset(u), hp.window_len);
      q_update(q, s, action, q_val, next, next_actions, hp.alpha, hp.lambda);

      gamma += q_val;
      trace.steps.push_back({n, u, offset, action, applied, delta_r, q_val});
    }
    trace.gamma.push_back(gamma);
    trace.iterations = n;
    zero_run = std::abs(gamma) <= hp.gamma_tolerance ? zero_run + 1 : 0;
    if (zero_run >= hp.convergence_window) {
      trace.converged = true;
      break;
    }
  }
  return EpisodeResult{std::move(trace), std::move(state)};
}

EpisodeResult run_episode(const Scenario& scenario, const RadioConfig& cfg,
                          const Hyperparams& hp, DeepQTable& tables, std::mt19937_64& rng) {
  if (!is_bijective(scenario.activated, scenario.association)) {
    throw ScenarioError("run_episode: association is not a bijection");
  }
  return run_episode(NetworkState(cfg, scenario), hp, tables, rng);
}

}  // namespace cran
