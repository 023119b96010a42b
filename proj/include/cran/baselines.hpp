#pragma once

// Reference power-state policies over the same activation pattern: dormant
// RRHs are either switched off or parked at a residual sleep power.

#include <optional>

#include "cran/network_state.hpp"

namespace cran {

struct BaselineConfig {
  // Residual power of a sleeping RRH. Unset means P_max - 10 dB.
  std::optional<PowerDbw> sleep_power;

  PowerDbw resolved_sleep(const RadioConfig& cfg) const {
    return sleep_power.value_or(PowerDbw::dbw(cfg.p_max_dbw - 10.0));
  }
  void validate(const RadioConfig& cfg) const;
};

// Activated RRHs at P_max, the rest OFF.
NetworkState activation_scheme(const Scenario& scenario, const RadioConfig& cfg);

// Activated RRHs at P_max, the rest at the sleep power. Sleeping RRHs draw
// power but do not radiate.
NetworkState sleep_scheme(const Scenario& scenario, const RadioConfig& cfg,
                          const BaselineConfig& baseline);

}  // namespace cran
