#include "cran/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace cran {

void BaselineConfig::validate(const RadioConfig& cfg) const {
  if (sleep_power && !sleep_power->is_off() && !(sleep_power->value() <= cfg.p_max_dbw)) {
    throw std::invalid_argument("baseline.sleep_power_dbw: must not exceed radio.p_max_dbw");
  }
}

NetworkState activation_scheme(const Scenario& scenario, const RadioConfig& cfg) {
  return NetworkState(cfg, scenario);
}

NetworkState sleep_scheme(const Scenario& scenario, const RadioConfig& cfg,
                          const BaselineConfig& baseline) {
  baseline.validate(cfg);
  NetworkState state(cfg, scenario);
  const auto sleep = baseline.resolved_sleep(cfg);
  for (int b = 0; b < state.rrh_count(); ++b) {
    if (!std::binary_search(scenario.activated.begin(), scenario.activated.end(), b)) {
      state.set_power(b, sleep);
    }
  }
  return state;
}

}  // namespace cran
