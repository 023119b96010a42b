#include "cran/network_state.hpp"

namespace cran {

NetworkState::NetworkState(const RadioConfig& cfg, const Scenario& scenario)
    : cfg_(cfg),
      powers_(scenario.topology.size(), PowerDbw::off()),
      serving_(scenario.association),
      rates_(scenario.desired_rates),
      gains_(compute_gains(cfg, scenario.topology, scenario.ues)) {
  for (int b : scenario.activated) powers_[b] = PowerDbw::dbw(cfg.p_max_dbw);
}

double NetworkState::interference_w(int ue) const {
  double sum = 0.0;
  for (int v = 0; v < ue_count(); ++v) {
    if (v == ue) continue;
    const int b = serving_[v];
    sum += dbw_to_watt(powers_[b]) * gains_.at(b, ue);
  }
  return sum;
}

ReceivedPower NetworkState::rsrp(int ue) const {
  const int b = serving_[ue];
  return cran::rsrp(powers_[b], gains_.gain(b, ue));
}

double NetworkState::sinr(int ue) const {
  const int b = serving_[ue];
  return sinr_from_interference({powers_[b], gains_.gain(b, ue)}, interference_w(ue),
                                cfg_.noise_w());
}

double NetworkState::throughput(int ue) const { return cran::throughput(cfg_, sinr(ue)); }

PowerDbw NetworkState::desired_power(int ue) const {
  return cran::desired_power(cfg_, gains_.gain(serving_[ue], ue), rates_[ue],
                             interference_w(ue));
}

double NetworkState::power_offset(int ue) const {
  return cran::power_offset(powers_[serving_[ue]], desired_power(ue));
}

bool NetworkState::satisfied(int ue) const { return is_satisfied(throughput(ue), rates_[ue]); }

bool is_satisfied(double rate, double desired) {
  return rate >= desired * (1.0 - kRateTolerance);
}

}  // namespace cran
