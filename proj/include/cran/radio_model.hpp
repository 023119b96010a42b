#pragma once

// Link-budget radio model: unit conversions, channel gain, RSRP, SINR,
// Shannon throughput, and the desired-power / power-offset algebra.
//
// Accumulation always happens in linear watts; dBW is used for the
// per-RRH power level and for offsets only.

#include <span>
#include <stdexcept>

namespace cran {

struct RadioConfig {
  double p_max_dbw = 15.2;
  double noise_dbw = -125.0;
  double bandwidth_hz = 10e6;
  double tx_gain_dbi = 17.5;
  double center_freq_hz = 1.8e9;
  double speed_of_light_mps = 3e8;
  // Exponent on the (c / 4 pi f_c D) term. 1 follows the printed link
  // budget; 2 gives free-space (Friis) loss.
  double pathloss_exponent = 1.0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  double noise_w() const;
  double p_max_w() const;
};

// Transmit power level in dBW, with a distinguished OFF state equal to 0 W.
class PowerDbw {
 public:
  constexpr PowerDbw() = default;  // OFF
  static constexpr PowerDbw off() { return PowerDbw{}; }
  static constexpr PowerDbw dbw(double value) { return PowerDbw{value, true}; }

  constexpr bool is_off() const { return !on_; }
  // Precondition: !is_off().
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(const PowerDbw&, const PowerDbw&) = default;

 private:
  constexpr PowerDbw(double v, bool on) : value_(v), on_(on) {}
  double value_ = 0.0;
  bool on_ = false;
};

struct LinkGain {
  double h_linear = 0.0;
};

struct ReceivedPower {
  double watts = 0.0;
  PowerDbw level;  // OFF when watts == 0
};

// A transmitter's contribution at a given receiver.
struct Emission {
  PowerDbw power;
  LinkGain gain;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double dbw_to_watt(PowerDbw p);
PowerDbw watt_to_dbw(double watts);

LinkGain channel_gain(const RadioConfig& cfg, double distance_m);

ReceivedPower rsrp(PowerDbw p, LinkGain g);

// Sum of P*H over the interferers, in watts.
double interference_w(std::span<const Emission> interferers);

double sinr(const Emission& serving, std::span<const Emission> interferers,
            double noise_w);
// Same, with the interference already summed.
double sinr_from_interference(const Emission& serving, double interference_w,
                              double noise_w);

double throughput(const RadioConfig& cfg, double gamma);
double desired_sinr(const RadioConfig& cfg, double rate_bps);

// Minimum serving power that reaches `rate_bps` with the given interference.
PowerDbw desired_power(const RadioConfig& cfg, LinkGain serving,
                       double rate_bps, double interference_w);

// P - P~ in dB. Positive means headroom; +infinity when the desired power
// is OFF (nothing is required). Throws DomainError when p_current is OFF.
double power_offset(PowerDbw p_current, PowerDbw p_desired);

}  // namespace cran
