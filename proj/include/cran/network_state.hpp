#pragma once

#include <vector>

#include "cran/radio_model.hpp"
#include "cran/scenario.hpp"

namespace cran {

// Per-RRH downlink powers plus the per-link gains of one scenario. Only the
// serving RRHs of the scenario's UEs radiate; every other RRH's power is
// bookkeeping for the consumption metrics.
class NetworkState {
 public:
  NetworkState(const RadioConfig& cfg, const Scenario& scenario);

  const RadioConfig& radio() const { return cfg_; }
  int rrh_count() const { return static_cast<int>(powers_.size()); }
  int ue_count() const { return static_cast<int>(serving_.size()); }

  int serving_rrh(int ue) const { return serving_[ue]; }
  double desired_rate(int ue) const { return rates_[ue]; }
  LinkGain gain(int rrh, int ue) const { return gains_.gain(rrh, ue); }
  const GainMatrix& gains() const { return gains_; }

  PowerDbw power(int rrh) const { return powers_[rrh]; }
  void set_power(int rrh, PowerDbw p) { powers_[rrh] = p; }
  const std::vector<PowerDbw>& powers() const { return powers_; }

  // Sum over the other serving RRHs of P_b' * H_{b',ue}, watts.
  double interference_w(int ue) const;
  ReceivedPower rsrp(int ue) const;
  double sinr(int ue) const;
  double throughput(int ue) const;
  PowerDbw desired_power(int ue) const;
  // Offset of the serving RRH at current interference; requires it to be on.
  double power_offset(int ue) const;
  bool satisfied(int ue) const;

 private:
  RadioConfig cfg_;
  std::vector<PowerDbw> powers_;
  std::vector<int> serving_;
  std::vector<double> rates_;
  GainMatrix gains_;
};

// A UE counts as satisfied when R >= R~ up to this relative slack, which
// absorbs rounding when a reduction lands exactly on the desired power.
inline constexpr double kRateTolerance = 1e-9;

bool is_satisfied(double rate, double desired);

}  // namespace cran
