#include "cran/radio_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cran {

void RadioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("radio." + field + ": " + why);
  };
  if (!(p_max_dbw > noise_dbw)) fail("p_max_dbw", "must exceed noise_dbw");
  if (!(bandwidth_hz > 0)) fail("bandwidth_hz", "must be positive");
  if (!(center_freq_hz > 0)) fail("center_freq_hz", "must be positive");
  if (!(speed_of_light_mps > 0)) fail("speed_of_light_mps", "must be positive");
  if (!(pathloss_exponent >= 1)) fail("pathloss_exponent", "must be >= 1");
  if (!std::isfinite(tx_gain_dbi)) fail("tx_gain_dbi", "must be finite");
}

double RadioConfig::noise_w() const { return dbw_to_watt(PowerDbw::dbw(noise_dbw)); }
double RadioConfig::p_max_w() const { return dbw_to_watt(PowerDbw::dbw(p_max_dbw)); }

double dbw_to_watt(PowerDbw p) {
  if (p.is_off()) return 0.0;
  return std::pow(10.0, p.value() / 10.0);
}

PowerDbw watt_to_dbw(double watts) {
  if (watts < 0 || std::isnan(watts)) {
    throw DomainError("watt_to_dbw: negative power " + std::to_string(watts));
  }
  if (watts == 0.0) return PowerDbw::off();
  return PowerDbw::dbw(10.0 * std::log10(watts));
}

LinkGain channel_gain(const RadioConfig& cfg, double distance_m) {
  if (!(distance_m > 0)) {
    throw DomainError("channel_gain: distance must be positive, got " +
                      std::to_string(distance_m));
  }
  const double tx = std::pow(10.0, cfg.tx_gain_dbi / 10.0);
  const double free_space = cfg.speed_of_light_mps /
                            (4.0 * std::numbers::pi * cfg.center_freq_hz * distance_m);
  return LinkGain{tx * std::pow(free_space, cfg.pathloss_exponent)};
}

ReceivedPower rsrp(PowerDbw p, LinkGain g) {
  const double w = dbw_to_watt(p) * g.h_linear;
  return ReceivedPower{w, watt_to_dbw(w)};
}

double interference_w(std::span<const Emission> interferers) {
  double sum = 0.0;
  for (const auto& e : interferers) sum += dbw_to_watt(e.power) * e.gain.h_linear;
  return sum;
}

double sinr_from_interference(const Emission& serving, double interference,
                              double noise_w) {
  return dbw_to_watt(serving.power) * serving.gain.h_linear / (interference + noise_w);
}

double sinr(const Emission& serving, std::span<const Emission> interferers,
            double noise_w) {
  return sinr_from_interference(serving, interference_w(interferers), noise_w);
}

double throughput(const RadioConfig& cfg, double gamma) {
  return cfg.bandwidth_hz * std::log1p(gamma) / std::numbers::ln2;
}

double desired_sinr(const RadioConfig& cfg, double rate_bps) {
  // expm1 keeps low-rate targets accurate.
  return std::expm1(rate_bps / cfg.bandwidth_hz * std::numbers::ln2);
}

PowerDbw desired_power(const RadioConfig& cfg, LinkGain serving, double rate_bps,
                       double interference) {
  const double gamma = desired_sinr(cfg, rate_bps);
  return watt_to_dbw(gamma * (interference + cfg.noise_w()) / serving.h_linear);
}

double power_offset(PowerDbw p_current, PowerDbw p_desired) {
  if (p_current.is_off()) throw DomainError("power_offset: current power is OFF");
  if (p_desired.is_off()) return std::numeric_limits<double>::infinity();
  return p_current.value() - p_desired.value();
}

}  // namespace cran
