// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cran/baselines.hpp"
#include "cran/experiment.hpp"
#include "cran/metrics.hpp"
#include "cran/network_state.hpp"
#include "cran/radio_model.hpp"
#include "cran/scenario.hpp"
#include "cran/sdql.hpp"

using namespace cran;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr double kRelTol = 1e-9;
constexpr int kOracleInstances = 1000;
constexpr int kTrials = 100;
const std::vector<int> kActivatedCounts{11, 17, 22, 28, 34};
const std::vector<double> kWeightGrid{0.1, 0.3, 0.5, 0.7, 0.9};
constexpr double kOrderingFraction = 0.95;
constexpr double kWeightSpread = 0.05;
constexpr double kConvergedFraction = 0.95;
constexpr double kIterBandLo = 5.0;
constexpr double kIterBandHi = 50.0;
constexpr int kBruteWindow = 3;
constexpr double kBruteSlackDbPerRrh = 1.0;
constexpr int kBruteInstances = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol = kRelTol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double watts(PowerDbw p) { return p.is_off() ? 0.0 : std::pow(10.0, p.value() / 10.0); }

double db_or_neg_inf(const DbAggregate& a) {
  return a.db ? *a.db : -std::numeric_limits<double>::infinity();
}

ExperimentConfig base_config() {
  auto cfg = parse_config("");
  cfg.trials = kTrials;
  cfg.base_seed = 1;
  return cfg;
}

// Shared SDQL/baseline sweep over activated counts, used by several criteria.
const ExperimentResult& count_sweep() {
  static const ExperimentResult result = [] {
    auto cfg = base_config();
    cfg.scenario.activated_counts = kActivatedCounts;
    return run_experiment(cfg, false);
  }();
  return result;
}

std::vector<TrialReport> sdql_reports(const ExperimentResult& r, int activated) {
  std::vector<TrialReport> out;
  for (const auto& o : r.outcomes) {
    if (o.cell.algorithm == Algorithm::kSdql && o.cell.activated_count == activated && o.ok()) {
      out.push_back(*o.report);
    }
  }
  return out;
}

const CellStats& stats_for(const ExperimentResult& r, Algorithm a, int activated) {
  for (const auto& c : r.cells) {
    if (c.cell.algorithm == a && c.cell.activated_count == activated) return c;
  }
  throw std::runtime_error("missing cell");
}

// 1. Algebraic oracles.
Outcome criterion_1() {
  const auto t0 = Clock::now();
  const RadioConfig cfg;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> dist_m(10, 2000), level(-60, 15.2), rate(1e5, 1e8),
      interf(0, 1e-8);
  int bad_radio = 0;
  for (int i = 0; i < kOracleInstances; ++i) {
    const auto h = channel_gain(cfg, dist_m(rng));
    const double i_w = interf(rng);
    const double r_target = rate(rng);
    // Desired power then SINR and rate give back the target.
    const auto p = desired_power(cfg, h, r_target, i_w);
    if (p.is_off()) { ++bad_radio; continue; }
    const double g = sinr_from_interference({p, h}, i_w, cfg.noise_w());
    if (!rel_close(throughput(cfg, g), r_target)) ++bad_radio;
    if (!rel_close(g, desired_sinr(cfg, r_target))) ++bad_radio;
    // Power to SINR to desired power.
    const auto p2 = PowerDbw::dbw(level(rng));
    const double g2 = sinr_from_interference({p2, h}, i_w, cfg.noise_w());
    const auto back = desired_power(cfg, h, throughput(cfg, g2), i_w);
    if (!rel_close(watts(back), watts(p2))) ++bad_radio;
  }

  int bad_metric = 0;
  const double pmax = cfg.p_max_dbw;
  const double pmax_w = std::pow(10.0, pmax / 10.0);
  for (int i = 0; i < kOracleInstances; ++i) {
    const int b_count = 1 + static_cast<int>(rng() % 57);
    std::vector<PowerDbw> powers(b_count);
    for (auto& p : powers) p = (rng() % 4 == 0) ? PowerDbw::off() : PowerDbw::dbw(level(rng));
    std::vector<int> serving;
    for (int b = 0; b < b_count; ++b) if (rng() % 3 == 0) serving.push_back(b);
    if (serving.empty()) serving.push_back(static_cast<int>(rng() % b_count));
    std::vector<double> offsets(serving.size());
    for (auto& d : offsets) d = level(rng) + 40;

    double red = 0, off = 0, ir = 0, ii = 0;
    for (auto p : powers) red += pmax_w - watts(p);
    for (double d : offsets) off += std::pow(10.0, d / 10.0);
    for (std::size_t u = 0; u < serving.size(); ++u) {
      for (std::size_t v = 0; v < serving.size(); ++v) {
        if (u == v) continue;
        ir += pmax_w - watts(powers[serving[v]]);
        ii += watts(powers[serving[v]]);
      }
    }
    const double n_ue = static_cast<double>(serving.size());
    bad_metric += !rel_close(avg_power_reduction(powers, pmax).linear, red / b_count);
    bad_metric += !rel_close(avg_power_offset(offsets).linear, off / n_ue);
    bad_metric += !rel_close(avg_interference_reduction(powers, pmax, serving, b_count).linear,
                             ir / n_ue / b_count);
    bad_metric += !rel_close(avg_interference(powers, serving, b_count).linear,
                             ii / n_ue / b_count);
  }
  const double secs = seconds_since(t0);
  return {bad_radio == 0 && bad_metric == 0 && secs < 10,
          fmt::format("{} radio and {} metric mismatches over {} instances at {:g} rel; {:.2f}s "
                      "(limit 10s)",
                      bad_radio, bad_metric, kOracleInstances, kRelTol, secs)};
}

// 2. No satisfied UE becomes weak on the 57-site, 11-active layout.
Outcome criterion_2() {
  const auto t0 = Clock::now();
  auto cfg = base_config();
  cfg.scenario.activated_counts = {11};
  cfg.algorithms = {Algorithm::kSdql};
  const auto r = run_experiment(cfg, false);
  int ok = 0, violations = 0;
  for (const auto& o : r.outcomes) {
    if (!o.ok()) continue;
    ++ok;
    violations += o.report->central_to_weak != 0;
  }
  const double secs = seconds_since(t0);
  return {ok >= kTrials && violations == 0 && secs < 120,
          fmt::format("{} trials, {} with central_to_weak > 0; {:.1f}s (limit 120s)", ok,
                      violations, secs)};
}

// 3. Scheme ordering and downward trend of power reduction.
Outcome criterion_3() {
  const auto t0 = Clock::now();
  const auto& r = count_sweep();
  const double secs = seconds_since(t0);
  bool ordered = true, trend = true;
  std::string table;
  std::vector<double> prev(3, std::numeric_limits<double>::infinity());
  for (int a : kActivatedCounts) {
    const double s = stats_for(r, Algorithm::kSdql, a).power_reduction_db.value_or(-1e300);
    const double act = stats_for(r, Algorithm::kActivation, a).power_reduction_db.value_or(-1e300);
    const double slp = stats_for(r, Algorithm::kSleep, a).power_reduction_db.value_or(-1e300);
    ordered = ordered && s > act && act > slp;
    const double cur[3] = {s, act, slp};
    for (int k = 0; k < 3; ++k) {
      trend = trend && cur[k] <= prev[k];
      prev[k] = cur[k];
    }
    table += fmt::format(" a{}:{:.3f}/{:.3f}/{:.3f}", a, s, act, slp);
  }
  return {ordered && trend && secs < 600,
          fmt::format("sdql/activation/sleep dB{}; ordered={} non-increasing={}; {:.1f}s "
                      "(limit 600s)",
                      table, ordered, trend, secs)};
}

// 4. Interference reduction < power reduction < power offset.
Outcome criterion_4() {
  const auto reports = sdql_reports(count_sweep(), 11);
  int converged = 0, ordered = 0, ir_lt_pr = 0, pr_lt_po = 0;
  double sum_ir = 0, sum_pr = 0, sum_po = 0;
  for (const auto& rep : reports) {
    if (!rep.converged) continue;
    ++converged;
    const double ir = db_or_neg_inf(rep.avg_interference_reduction);
    const double pr = db_or_neg_inf(rep.avg_power_reduction);
    const double po = db_or_neg_inf(rep.avg_power_offset);
    ir_lt_pr += ir < pr;
    pr_lt_po += pr < po;
    ordered += ir < pr && pr < po;
    sum_ir += ir;
    sum_pr += pr;
    sum_po += po;
  }
  const double frac = converged ? static_cast<double>(ordered) / converged : 0.0;
  return {converged > 0 && frac >= kOrderingFraction,
          fmt::format("{}/{} converged trials ordered ({:.3f}, need >= {}); IR<PR in {}, PR<PO "
                      "in {}; means IR {:.2f} PR {:.2f} PO {:.2f} dB",
                      ordered, converged, frac, kOrderingFraction, ir_lt_pr, pr_lt_po,
                      sum_ir / std::max(converged, 1), sum_pr / std::max(converged, 1),
                      sum_po / std::max(converged, 1))};
}

// 5. Power reduction barely depends on the weights.
Outcome criterion_5() {
  auto cfg = base_config();
  cfg.scenario.activated_counts = {11};
  cfg.algorithms = {Algorithm::kSdql};
  cfg.sweep.clear();
  for (double w0 : kWeightGrid) cfg.sweep.push_back({w0, 1.0 - w0});
  const auto r = run_experiment(cfg, false);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
  std::string values;
  for (const auto& c : r.cells) {
    const double v = c.power_reduction_db.value_or(std::nan(""));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    values += fmt::format(" w0={}:{:.4f}", c.cell.weights.w0, v);
  }
  const double mean = sum / static_cast<double>(r.cells.size());
  const double spread = (hi - lo) / std::abs(mean);
  return {std::isfinite(spread) && spread < kWeightSpread,
          fmt::format("dB{}; relative spread {:.4f} (limit {})", values, spread, kWeightSpread)};
}

// 6. Convergence rule and iteration trend.
Outcome criterion_6() {
  const auto& r = count_sweep();
  int total = 0, converged = 0;
  bool monotone = true, in_band = true;
  double prev = -std::numeric_limits<double>::infinity();
  std::string means;
  for (int a : kActivatedCounts) {
    for (const auto& rep : sdql_reports(r, a)) {
      ++total;
      converged += rep.converged;
    }
    const double it = stats_for(r, Algorithm::kSdql, a).iterations;
    monotone = monotone && it > prev;
    in_band = in_band && it >= kIterBandLo && it <= kIterBandHi;
    prev = it;
    means += fmt::format(" a{}:{:.2f}", a, it);
  }
  const double frac = total ? static_cast<double>(converged) / total : 0.0;
  return {frac >= kConvergedFraction && monotone && in_band,
          fmt::format("converged {}/{} ({:.3f}, need >= {}); mean iterations{}; increasing={} "
                      "in [{}, {}]={}",
                      converged, total, frac, kConvergedFraction, means, monotone, kIterBandLo,
                      kIterBandHi, in_band)};
}

// 7. Single link converges to P_max - d.
Outcome criterion_7() {
  const auto t0 = Clock::now();
  const RadioConfig cfg;
  Hyperparams hp;
  hp.epsilon = 0.0;
  const double floor_gap = cfg.p_max_dbw - power_floor_dbw(cfg);
  const int d_max = std::min<int>(hp.window_len * hp.max_iterations,
                                  static_cast<int>(std::floor(floor_gap)));
  int failures = 0, checked = 0;
  std::string first_failure;
  for (int d = 0; d <= d_max; ++d) {
    Scenario s;
    s.topology = build_topology(1, 200);
    s.activated = {0};
    s.ues = {{75, 0}};
    s.association = {0};
    const double h = channel_gain(cfg, 75).h_linear;
    const double p_desired = std::pow(10.0, (cfg.p_max_dbw - d) / 10.0);
    s.desired_rates = {throughput(cfg, p_desired * h / cfg.noise_w())};
    DeepQTable tables(1, hp.state_bound, hp.window_len);
    std::mt19937_64 rng(d);
    const auto r = run_episode(s, cfg, hp, tables, rng);
    const auto& end = r.final_state;
    const double final_p = end.power(0).value();
    const double residual = end.power_offset(0);
    const bool ok = r.trace.converged && rel_close(final_p, cfg.p_max_dbw - d, 1e-12) &&
                    residual > -1e-9 && residual < 1.0 && end.satisfied(0) &&
                    rel_close(end.throughput(0), s.desired_rates[0], 1e-6);
    ++checked;
    if (!ok) {
      ++failures;
      if (first_failure.empty()) {
        first_failure = fmt::format(" first failure d={} final={} residual={}", d, final_p,
                                    residual);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 1.0,
          fmt::format("{} offsets d=0..{} checked, {} failures{}; {:.3f}s (limit 1s)", checked,
                      d_max, failures, first_failure, secs)};
}

// 8. Two RRHs, two UEs: SDQL against exhaustive integer search.
Outcome criterion_8() {
  const auto t0 = Clock::now();
  const RadioConfig cfg;
  Hyperparams hp;
  hp.window_len = kBruteWindow;
  ScenarioParams params;
  params.rrh_count = 2;
  params.activated_count = 2;
  const int max_cut = static_cast<int>(std::floor(cfg.p_max_dbw - power_floor_dbw(cfg)));
  int instances = 0, skipped = 0, infeasible = 0, beaten = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; instances + skipped < kBruteInstances; ++seed) {
    const auto sc = build_scenario(params, cfg, seed);
    const NetworkState start(cfg, sc);
    if (!start.satisfied(0) || !start.satisfied(1)) {
      ++skipped;  // no feasible point to search from
      continue;
    }
    ++instances;
    DeepQTable tables(2, hp.state_bound, hp.window_len);
    auto rng = make_rng(seed, kEpisodeStream);
    const auto r = run_episode(start, hp, tables, rng);
    const auto& end = r.final_state;
    if (!end.satisfied(0) || !end.satisfied(1)) ++infeasible;
    const double sdql_total = 2 * cfg.p_max_dbw - end.power(0).value() - end.power(1).value();

    int best = -1;
    NetworkState probe = start;
    for (int c0 = 0; c0 <= max_cut; ++c0) {
      probe.set_power(0, PowerDbw::dbw(cfg.p_max_dbw - c0));
      for (int c1 = 0; c1 <= max_cut; ++c1) {
        probe.set_power(1, PowerDbw::dbw(cfg.p_max_dbw - c1));
        if (c0 + c1 > best && probe.satisfied(0) && probe.satisfied(1)) best = c0 + c1;
      }
    }
    const double gap = best - sdql_total;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 2 * kBruteSlackDbPerRrh + 1e-9) ++beaten;
  }
  const double secs = seconds_since(t0);
  return {instances > 0 && infeasible == 0 && beaten == 0 && secs < 10,
          fmt::format("{} instances ({} skipped as initially infeasible); {} infeasible fixed "
                      "points; {} beaten by more than {} dB total; worst gap {:.3f} dB; {:.2f}s "
                      "(limit 10s)",
                      instances, skipped, infeasible, beaten, 2 * kBruteSlackDbPerRrh,
                      worst_gap, secs)};
}

// 9. Byte-identical summaries across repeated runs.
Outcome criterion_9() {
  auto cfg = base_config();
  cfg.trials = 20;
  cfg.scenario.activated_counts = {11, 22};
  cfg.sweep = {{0.5, 0.5}, {0.1, 0.9}};
  const auto root = fs::temp_directory_path() / "cran_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> summaries;
  for (int run = 0; run < 2; ++run) {
    cfg.output_dir = (root / fmt::format("run{}", run)).string();
    run_experiment(cfg, true);
    std::ifstream in(fs::path(cfg.output_dir) / "summary.csv", std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    summaries.push_back(os.str());
  }
  fs::remove_all(root);
  const bool same = !summaries[0].empty() && summaries[0] == summaries[1];
  return {same, fmt::format("two runs, {} bytes each, identical={}", summaries[0].size(), same)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 algebraic oracles", criterion_1},
      {"C2 constraint preservation", criterion_2},
      {"C3 scheme ordering", criterion_3},
      {"C4 metric ordering", criterion_4},
      {"C5 weight insensitivity", criterion_5},
      {"C6 convergence", criterion_6},
      {"C7 single-link closed form", criterion_7},
      {"C8 small-instance brute force", criterion_8},
      {"C9 determinism", criterion_9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed,
                           criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
