#pragma once

// Reproducible network instances: hex-lattice RRH topology, activation
// pattern, one static UE per activated RRH, desired rates, and max-RSRP
// association.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cran/radio_model.hpp"
#include "json.hpp"

namespace cran {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

struct Topology {
  std::vector<Vec2> rrh_positions;
  double inter_site_distance_m = 0.0;

  int size() const { return static_cast<int>(rrh_positions.size()); }
};

// Desired-rate law: i.i.d. uniform over a finite support (bit/s).
struct RateProfile {
  std::vector<double> support_bps;

  static RateProfile uniform_mbps(double lo, double hi, double step);
  static RateProfile fixed(double rate_bps) { return RateProfile{{rate_bps}}; }
  // 2, 4, ..., 20 Mb/s.
  static RateProfile standard() { return uniform_mbps(2, 20, 2); }
};

// Dense B x U matrix of linear channel gains.
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(int rrh_count, int ue_count)
      : rrhs_(rrh_count), ues_(ue_count),
        h_(static_cast<std::size_t>(rrh_count) * ue_count, 0.0) {}

  int rrh_count() const { return rrhs_; }
  int ue_count() const { return ues_; }

  double& at(int rrh, int ue) { return h_[index(rrh, ue)]; }
  double at(int rrh, int ue) const { return h_[index(rrh, ue)]; }
  LinkGain gain(int rrh, int ue) const { return LinkGain{at(rrh, ue)}; }

 private:
  std::size_t index(int rrh, int ue) const {
    return static_cast<std::size_t>(rrh) * ues_ + ue;
  }
  int rrhs_ = 0;
  int ues_ = 0;
  std::vector<double> h_;
};

struct Scenario {
  Topology topology;
  std::vector<int> activated;  // sorted RRH indices
  std::vector<Vec2> ues;
  std::vector<double> desired_rates;  // bit/s
  std::vector<int> association;       // serving RRH per UE
  std::uint64_t seed = 0;

  int ue_count() const { return static_cast<int>(ues.size()); }
};

struct ScenarioParams {
  int rrh_count = 57;
  double inter_site_distance_m = 200.0;
  int activated_count = 11;
  RateProfile rates = RateProfile::standard();
  double min_ue_distance_m = 10.0;
  int max_redraws = 100;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Independent, reproducible stream for (seed, stream id).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);
inline constexpr std::uint64_t kScenarioStream = 1;
inline constexpr std::uint64_t kEpisodeStream = 2;

Topology build_topology(int b_count, double inter_site_distance_m);

// Uniform over the annulus [min_distance, isd/2] around each activated RRH.
std::vector<Vec2> place_ues(const Topology& topology, std::span<const int> activated,
                            std::mt19937_64& rng, double min_distance_m = 10.0);

std::vector<double> assign_desired_rates(int ue_count, std::mt19937_64& rng,
                                         const RateProfile& profile);

std::vector<int> choose_activated(int b_count, int activated_count, std::mt19937_64& rng);

GainMatrix compute_gains(const RadioConfig& cfg, const Topology& topology,
                         std::span<const Vec2> ues);

// Max-RSRP serving RRH per UE with every activated RRH at P_max; ties go to
// the lowest RRH index.
std::vector<int> associate(const RadioConfig& cfg, std::span<const int> activated,
                           const GainMatrix& gains);

bool is_bijective(std::span<const int> activated, std::span<const int> association);

// Full construction; placements are redrawn while the association is not a
// bijection onto the activated set. Throws ScenarioError after max_redraws.
Scenario build_scenario(const ScenarioParams& params, const RadioConfig& cfg,
                        std::uint64_t seed);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace cran
