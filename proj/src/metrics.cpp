#include "cran/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cran {

namespace {

double mean_over_victims(std::span<const int> serving, std::span<const double> per_rrh) {
  const auto ues = serving.size();
  if (ues == 0) return 0.0;
  double total = 0.0;
  for (int b : serving) total += per_rrh[b];
  // Every victim sees all serving RRHs but its own.
  double sum = 0.0;
  for (int b : serving) sum += total - per_rrh[b];
  return sum / static_cast<double>(ues);
}

nlohmann::json aggregate_json(const DbAggregate& a) {
  return {{"linear", a.linear}, {"db", a.db ? nlohmann::json(*a.db) : nlohmann::json()}};
}

DbAggregate aggregate_from_json(const nlohmann::json& j) {
  DbAggregate a;
  a.linear = j.at("linear").get<double>();
  if (!j.at("db").is_null()) a.db = j.at("db").get<double>();
  return a;
}

}  // namespace

DbAggregate DbAggregate::from_linear(double linear) {
  DbAggregate a;
  a.linear = linear;
  if (linear > 0) a.db = 10.0 * std::log10(linear);
  return a;
}

DbAggregate avg_power_reduction(std::span<const PowerDbw> powers, double p_max_dbw) {
  if (powers.empty()) throw std::invalid_argument("avg_power_reduction: no RRHs");
  const double p_max = dbw_to_watt(PowerDbw::dbw(p_max_dbw));
  double sum = 0.0;
  for (auto p : powers) sum += p_max - dbw_to_watt(p);
  return DbAggregate::from_linear(sum / static_cast<double>(powers.size()));
}

DbAggregate avg_power_offset(std::span<const double> offsets_db) {
  double sum = 0.0;
  int n = 0;
  for (double d : offsets_db) {
    if (!std::isfinite(d)) continue;
    sum += std::pow(10.0, d / 10.0);
    ++n;
  }
  return DbAggregate::from_linear(n == 0 ? 0.0 : sum / n);
}

DbAggregate avg_interference_reduction(std::span<const PowerDbw> powers, double p_max_dbw,
                                       std::span<const int> serving, int rrh_count) {
  if (rrh_count < 1) throw std::invalid_argument("avg_interference_reduction: no RRHs");
  const double p_max = dbw_to_watt(PowerDbw::dbw(p_max_dbw));
  std::vector<double> reduction(powers.size());
  for (std::size_t b = 0; b < powers.size(); ++b) reduction[b] = p_max - dbw_to_watt(powers[b]);
  return DbAggregate::from_linear(mean_over_victims(serving, reduction) / rrh_count);
}

DbAggregate avg_interference(std::span<const PowerDbw> powers, std::span<const int> serving,
                             int rrh_count) {
  if (rrh_count < 1) throw std::invalid_argument("avg_interference: no RRHs");
  std::vector<double> watts(powers.size());
  for (std::size_t b = 0; b < powers.size(); ++b) watts[b] = dbw_to_watt(powers[b]);
  return DbAggregate::from_linear(mean_over_victims(serving, watts) / rrh_count);
}

Transitions satisfaction_transitions(std::span<const RatePair> before,
                                     std::span<const RatePair> after) {
  if (before.size() != after.size()) {
    throw std::invalid_argument("satisfaction_transitions: UE sets differ");
  }
  Transitions t;
  for (std::size_t u = 0; u < before.size(); ++u) {
    const bool was = is_satisfied(before[u].rate, before[u].desired);
    const bool is = is_satisfied(after[u].rate, after[u].desired);
    if (!was && is) ++t.weak_to_central;
    if (was && !is) ++t.central_to_weak;
  }
  return t;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_cdf: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> cdf(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cdf[i] = {sorted[i], static_cast<double>(i + 1) / n};
  }
  return cdf;
}

TrialReport make_report(const NetworkState& start, const NetworkState& end, int iterations,
                        bool converged) {
  const auto& cfg = end.radio();
  const int ues = end.ue_count();
  std::vector<int> serving(ues);
  for (int u = 0; u < ues; ++u) serving[u] = end.serving_rrh(u);

  TrialReport r;
  r.iterations = iterations;
  r.converged = converged;
  r.avg_power_reduction = avg_power_reduction(end.powers(), cfg.p_max_dbw);
  r.avg_interference_reduction =
      avg_interference_reduction(end.powers(), cfg.p_max_dbw, serving, end.rrh_count());
  r.avg_interference = avg_interference(end.powers(), serving, end.rrh_count());

  const double p_max_w = cfg.p_max_w();
  std::vector<RatePair> before(ues), after(ues);
  for (int u = 0; u < ues; ++u) {
    const int b = serving[u];
    const double desired_final = dbw_to_watt(end.desired_power(u));
    r.power_offset_db.push_back(cfg.p_max_dbw - 10.0 * std::log10(desired_final));
    r.initial_offset_db.push_back(start.power_offset(u));
    r.power_reduction_db.push_back(cfg.p_max_dbw - end.power(b).value());

    double interference_cut = 0.0;
    for (int v = 0; v < ues; ++v) {
      if (v != u) interference_cut += p_max_w - dbw_to_watt(end.power(serving[v]));
    }
    r.interference_reduction_w.push_back(interference_cut);

    before[u] = {start.throughput(u), start.desired_rate(u)};
    after[u] = {end.throughput(u), end.desired_rate(u)};
    r.throughput_loss_mbps.push_back((before[u].rate - after[u].rate) / 1e6);
    r.throughput_loss_total_mbps += r.throughput_loss_mbps.back();
  }
  r.avg_power_offset = avg_power_offset(r.power_offset_db);
  const auto t = satisfaction_transitions(before, after);
  r.weak_to_central = t.weak_to_central;
  r.central_to_weak = t.central_to_weak;
  return r;
}

nlohmann::json TrialReport::to_json() const {
  return {
      {"algorithm", algorithm},
      {"activated_count", activated_count},
      {"w0", w0},
      {"w1", w1},
      {"trial", trial},
      {"seed", seed},
      {"avg_power_reduction", aggregate_json(avg_power_reduction)},
      {"avg_power_offset", aggregate_json(avg_power_offset)},
      {"avg_interference_reduction", aggregate_json(avg_interference_reduction)},
      {"avg_interference", aggregate_json(avg_interference)},
      {"throughput_loss_total_mbps", throughput_loss_total_mbps},
      {"weak_to_central", weak_to_central},
      {"central_to_weak", central_to_weak},
      {"iterations", iterations},
      {"converged", converged},
      {"samples",
       {{"power_offset_db", power_offset_db},
        {"initial_offset_db", initial_offset_db},
        {"power_reduction_db", power_reduction_db},
        {"interference_reduction_w", interference_reduction_w},
        {"throughput_loss_mbps", throughput_loss_mbps}}},
  };
}

TrialReport TrialReport::from_json(const nlohmann::json& j) {
  TrialReport r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.activated_count = j.at("activated_count").get<int>();
  r.w0 = j.at("w0").get<double>();
  r.w1 = j.at("w1").get<double>();
  r.trial = j.at("trial").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.avg_power_reduction = aggregate_from_json(j.at("avg_power_reduction"));
  r.avg_power_offset = aggregate_from_json(j.at("avg_power_offset"));
  r.avg_interference_reduction = aggregate_from_json(j.at("avg_interference_reduction"));
  r.avg_interference = aggregate_from_json(j.at("avg_interference"));
  r.throughput_loss_total_mbps = j.at("throughput_loss_total_mbps").get<double>();
  r.weak_to_central = j.at("weak_to_central").get<int>();
  r.central_to_weak = j.at("central_to_weak").get<int>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  const auto& s = j.at("samples");
  r.power_offset_db = s.at("power_offset_db").get<std::vector<double>>();
  r.initial_offset_db = s.at("initial_offset_db").get<std::vector<double>>();
  r.power_reduction_db = s.at("power_reduction_db").get<std::vector<double>>();
  r.interference_reduction_w = s.at("interference_reduction_w").get<std::vector<double>>();
  r.throughput_loss_mbps = s.at("throughput_loss_mbps").get<std::vector<double>>();
  return r;
}

}  // namespace cran
