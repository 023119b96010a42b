#include "cran/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace cran {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

RateProfile RateProfile::uniform_mbps(double lo, double hi, double step) {
  RateProfile p;
  for (double r = lo; r <= hi + 1e-9; r += step) p.support_bps.push_back(r * 1e6);
  return p;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Topology build_topology(int b_count, double isd) {
  if (b_count < 1) throw std::invalid_argument("build_topology: b_count must be >= 1");
  if (!(isd > 0)) throw std::invalid_argument("build_topology: distance must be positive");

  // Axial hex coordinates, walked ring by ring.
  static constexpr std::array<std::array<int, 2>, 6> kDirs{
      {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
  std::vector<std::array<int, 2>> axial{{0, 0}};
  for (int ring = 1; static_cast<int>(axial.size()) < b_count; ++ring) {
    int q = kDirs[4][0] * ring;
    int r = kDirs[4][1] * ring;
    for (const auto& dir : kDirs) {
      for (int step = 0; step < ring; ++step) {
        axial.push_back({q, r});
        q += dir[0];
        r += dir[1];
      }
    }
  }
  axial.resize(b_count);

  Topology t;
  t.inter_site_distance_m = isd;
  t.rrh_positions.reserve(b_count);
  for (const auto& [q, r] : axial) {
    t.rrh_positions.push_back(
        {isd * (q + r / 2.0), isd * r * std::numbers::sqrt3 / 2.0});
  }
  return t;
}

std::vector<Vec2> place_ues(const Topology& topology, std::span<const int> activated,
                            std::mt19937_64& rng, double min_distance_m) {
  if (activated.empty()) throw std::invalid_argument("place_ues: no activated RRH");
  const double r_max = topology.inter_site_distance_m / 2.0;
  const double r_min = std::min(min_distance_m, r_max);
  std::uniform_real_distribution<double> area(r_min * r_min, r_max * r_max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  std::vector<Vec2> ues;
  ues.reserve(activated.size());
  for (int b : activated) {
    const Vec2 c = topology.rrh_positions.at(b);
    const double radius = std::sqrt(area(rng));
    const double theta = angle(rng);
    ues.push_back({c.x + radius * std::cos(theta), c.y + radius * std::sin(theta)});
  }
  return ues;
}

std::vector<double> assign_desired_rates(int ue_count, std::mt19937_64& rng,
                                         const RateProfile& profile) {
  if (profile.support_bps.empty()) {
    throw std::invalid_argument("assign_desired_rates: empty rate profile");
  }
  for (double r : profile.support_bps) {
    if (!(r > 0)) throw std::invalid_argument("assign_desired_rates: non-positive rate");
  }
  std::uniform_int_distribution<std::size_t> pick(0, profile.support_bps.size() - 1);
  std::vector<double> rates(ue_count);
  for (auto& r : rates) r = profile.support_bps[pick(rng)];
  return rates;
}

std::vector<int> choose_activated(int b_count, int activated_count, std::mt19937_64& rng) {
  if (activated_count < 1 || activated_count > b_count) {
    throw std::invalid_argument("choose_activated: activated count " +
                                std::to_string(activated_count) + " outside [1, " +
                                std::to_string(b_count) + "]");
  }
  std::vector<int> all(b_count);
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates; std::sample's draw pattern is library-specific.
  for (int i = 0; i < activated_count; ++i) {
    std::uniform_int_distribution<int> pick(i, b_count - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  std::vector<int> chosen(all.begin(), all.begin() + activated_count);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

GainMatrix compute_gains(const RadioConfig& cfg, const Topology& topology,
                         std::span<const Vec2> ues) {
  GainMatrix g(topology.size(), static_cast<int>(ues.size()));
  for (int b = 0; b < topology.size(); ++b) {
    for (int u = 0; u < static_cast<int>(ues.size()); ++u) {
      g.at(b, u) = channel_gain(cfg, distance(topology.rrh_positions[b], ues[u])).h_linear;
    }
  }
  return g;
}

std::vector<int> associate(const RadioConfig& cfg, std::span<const int> activated,
                           const GainMatrix& gains) {
  const PowerDbw p_max = PowerDbw::dbw(cfg.p_max_dbw);
  std::vector<int> serving(gains.ue_count(), -1);
  for (int u = 0; u < gains.ue_count(); ++u) {
    double best = -1.0;
    for (int b : activated) {  // ascending, so strict > keeps the lowest index on ties
      const double w = rsrp(p_max, gains.gain(b, u)).watts;
      if (w > best) {
        best = w;
        serving[u] = b;
      }
    }
  }
  return serving;
}

bool is_bijective(std::span<const int> activated, std::span<const int> association) {
  if (activated.size() != association.size()) return false;
  std::vector<int> a(association.begin(), association.end());
  std::sort(a.begin(), a.end());
  return std::equal(a.begin(), a.end(), activated.begin(), activated.end());
}

Scenario build_scenario(const ScenarioParams& params, const RadioConfig& cfg,
                        std::uint64_t seed) {
  auto rng = make_rng(seed, kScenarioStream);
  Scenario s;
  s.seed = seed;
  s.topology = build_topology(params.rrh_count, params.inter_site_distance_m);
  s.activated = choose_activated(params.rrh_count, params.activated_count, rng);
  s.desired_rates = assign_desired_rates(params.activated_count, rng, params.rates);
  for (int attempt = 0; attempt <= params.max_redraws; ++attempt) {
    s.ues = place_ues(s.topology, s.activated, rng, params.min_ue_distance_m);
    s.association = associate(cfg, s.activated, compute_gains(cfg, s.topology, s.ues));
    if (is_bijective(s.activated, s.association)) return s;
  }
  throw ScenarioError("build_scenario: no bijective association after " +
                      std::to_string(params.max_redraws) + " redraws (seed " +
                      std::to_string(seed) + ")");
}

nlohmann::json scenario_to_json(const Scenario& s) {
  auto points = [](const std::vector<Vec2>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : v) arr.push_back({p.x, p.y});
    return arr;
  };
  return {
      {"seed", s.seed},
      {"inter_site_distance_m", s.topology.inter_site_distance_m},
      {"rrh_positions", points(s.topology.rrh_positions)},
      {"activated", s.activated},
      {"ues", points(s.ues)},
      {"desired_rates_bps", s.desired_rates},
      {"association", s.association},
  };
}

Scenario scenario_from_json(const nlohmann::json& j) {
  auto points = [](const nlohmann::json& arr) {
    std::vector<Vec2> v;
    for (const auto& p : arr) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return v;
  };
  Scenario s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.topology.inter_site_distance_m = j.at("inter_site_distance_m").get<double>();
  s.topology.rrh_positions = points(j.at("rrh_positions"));
  s.activated = j.at("activated").get<std::vector<int>>();
  s.ues = points(j.at("ues"));
  s.desired_rates = j.at("desired_rates_bps").get<std::vector<double>>();
  s.association = j.at("association").get<std::vector<int>>();
  if (s.ues.size() != s.activated.size() || s.desired_rates.size() != s.ues.size() ||
      s.association.size() != s.ues.size()) {
    throw ScenarioError("scenario json: inconsistent UE array lengths");
  }
  for (int b : s.activated) {
    if (b < 0 || b >= s.topology.size()) throw ScenarioError("scenario json: bad RRH index");
  }
  if (!is_bijective(s.activated, s.association)) {
    throw ScenarioError("scenario json: association is not a bijection");
  }
  return s;
}

}  // namespace cran
