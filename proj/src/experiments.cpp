#include "docsim/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "docsim/coalition.hpp"
#include "docsim/parallel.hpp"

namespace docsim::experiments {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

EpisodeBatch run_batch(const EpisodeConfig& config, std::size_t replications,
                       std::size_t warmup, std::uint64_t seed) {
  EpisodeBatch batch;
  batch.runs.resize(replications);
  parallel_for(replications, [&](std::size_t r) {
    batch.runs[r] = run_episode(config, seed, r);
  });
  std::vector<std::vector<sim::IntervalReport>> reports;
  for (const auto& run : batch.runs) reports.push_back(run.reports);
  batch.estimate = sim::measure_throughput(reports, warmup);
  return batch;
}

namespace {

// Per-station throughputs of one replication, reduced to what grids need.
struct RunDigest {
  std::vector<double> r;
  std::vector<double> t;
};

RunDigest digest(const EpisodeResult& res, std::size_t warmup) {
  return {episode_throughput(res, warmup), mean_channel_time(res, warmup)};
}

sim::ThroughputEstimate estimate_from(const std::vector<RunDigest>& runs,
                                      std::size_t begin, std::size_t count) {
  sim::ThroughputEstimate est;
  if (count == 0) return est;
  const std::size_t n = runs[begin].r.size();
  est.mean_bps.assign(n, 0.0);
  est.half_width.assign(n, 0.0);
  est.ci_free = count < 2;
  std::vector<double> col(count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < count; ++k) col[k] = runs[begin + k].r[i];
    const auto ci = sim::mean_ci(col);
    est.mean_bps[i] = ci.mean;
    est.half_width[i] = ci.half_width;
  }
  return est;
}

// Runs every (config, replication) pair in parallel and keeps only digests.
std::vector<RunDigest> run_grid(const std::vector<EpisodeConfig>& configs,
                                std::size_t replications, std::size_t warmup,
                                std::uint64_t seed) {
  std::vector<RunDigest> out(configs.size() * replications);
  parallel_for(out.size(), [&](std::size_t job) {
    const auto& cfg = configs[job / replications];
    out[job] = digest(run_episode(cfg, seed, job % replications), warmup);
  });
  return out;
}

sim::ThroughputEstimate run_fixed(const NetworkParams& params,
                                  const std::vector<double>& p,
                                  const std::vector<double>& thresholds,
                                  std::int64_t intervals,
                                  std::size_t replications, std::uint64_t seed) {
  std::vector<std::vector<sim::IntervalReport>> reps(replications);
  parallel_for(replications, [&](std::size_t r) {
    sim::ContentionContext ctx(params.models, params.tx_slots, seed, r);
    for (std::int64_t k = 0; k < intervals; ++k)
      reps[r].push_back(
          sim::run_interval(p, thresholds, params.interval_slots, ctx));
  });
  return sim::measure_throughput(reps, 0);
}

std::int64_t measured_intervals(const Scenario& s) {
  return std::max<std::int64_t>(
      1, s.run.intervals - static_cast<std::int64_t>(s.run.warmup));
}

std::vector<double> head(const std::vector<double>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

void add_summary(ExperimentResult& out, const std::string& param,
                 const sim::ThroughputEstimate& est) {
  for (std::size_t i = 0; i < est.mean_bps.size(); ++i)
    out.summary.push_back({param, i, est.mean_bps[i], est.half_width[i]});
}

void add_rows(Table& table, const std::string& param,
              const sim::ThroughputEstimate& est) {
  for (std::size_t i = 0; i < est.mean_bps.size(); ++i)
    table.rows.push_back({param, std::to_string(i),
                          format_number(est.mean_bps[i]),
                          format_number(est.half_width[i])});
}

Table summary_shaped(const std::string& file) {
  return {file, {"param", "station", "throughput_bps", "ci_halfwidth"}, {}};
}

std::string trace_file(const std::string& label) {
  std::string safe;
  for (char c : label)
    safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')
                ? c
                : '_';
  return "trace_" + safe + ".csv";
}

double total(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

// ---- experiment kinds ----

void run_fairness(const Scenario& base, std::uint64_t seed,
                  ExperimentResult& out) {
  Table stat = summary_shaped("baseline_static.csv");
  Table nonopp = summary_shaped("baseline_nonopportunistic.csv");
  Table fair{"fairness.csv", {"param", "policy", "fairness", "jain", "flagged"}, {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const auto doc = doc_throughput(s, seed);
    const auto st = baseline_static(s, seed);
    const auto no = baseline_nonopportunistic(s, seed);
    add_summary(out, label, doc);
    add_rows(stat, label, st);
    add_rows(nonopp, label, no);
    for (const auto& [name, est] :
         {std::pair{"doc", &doc}, {"static", &st}, {"nonopportunistic", &no}}) {
      const auto m = fairness_and_tables(est->mean_bps);
      fair.rows.push_back({label, name,
                           m.flagged ? "" : format_number(m.fairness),
                           format_number(m.jain), m.flagged ? "1" : "0"});
    }
  }
  out.tables.push_back(std::move(stat));
  out.tables.push_back(std::move(nonopp));
  out.tables.push_back(std::move(fair));
}

void run_attack_grid(const Scenario& base, std::uint64_t seed,
                     ExperimentResult& out) {
  Table attack{"attack.csv",
               {"param", "p", "threshold_scale", "attacker_bps", "attacker_ci",
                "reference_bps", "total_bps", "reference_total_bps"},
               {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const std::size_t k = s.selfish.front().station;
    std::vector<EpisodeConfig> configs{s.episode_config(true)};
    std::vector<std::pair<double, double>> grid;
    const double thr = analytic::solve_threshold(s.models[k], s.network());
    for (double p : s.attack_p) {
      for (double scale : s.attack_scales) {
        EpisodeConfig cfg = s.episode_config(false);
        auto& st = cfg.stations[k].strategy;
        st.kind = strategies::StrategyKind::kFixed;
        st.fixed_p = p;
        st.fixed_threshold = scale * thr;
        cfg.stations[k].selfish_from = 0;
        cfg.record_traces = false;
        configs.push_back(cfg);
        grid.emplace_back(p, scale);
      }
    }
    configs.front().record_traces = false;
    const std::size_t reps = s.run.replications;
    const auto runs = run_grid(configs, reps, s.run.warmup, seed);
    const auto ref = estimate_from(runs, 0, reps);
    add_summary(out, label + ";doc", ref);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto est = estimate_from(runs, (g + 1) * reps, reps);
      const std::string param = label + ";p=" + format_number(grid[g].first) +
                                ";scale=" + format_number(grid[g].second);
      add_summary(out, param, est);
      attack.rows.push_back(
          {label, format_number(grid[g].first), format_number(grid[g].second),
           format_number(est.mean_bps[k]), format_number(est.half_width[k]),
           format_number(ref.mean_bps[k]),
           format_number(total(head(est.mean_bps, s.models.size()))),
           format_number(total(head(ref.mean_bps, s.models.size())))});
    }
  }
  out.tables.push_back(std::move(attack));
}

void run_adaptive(const Scenario& base, std::uint64_t seed,
                  ExperimentResult& out) {
  Table table{"adaptive.csv",
              {"param", "strategy", "attacker_bps", "attacker_ci",
               "reference_bps"},
              {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const std::size_t k = s.selfish.front().station;
    const std::size_t reps = s.run.replications;
    // The attacker learns r_k* from an all-DOC calibration run of the same
    // replication.
    EpisodeConfig honest = s.episode_config(true);
    honest.record_traces = false;
    const auto calib = run_grid({honest}, reps, s.run.warmup, seed);
    add_summary(out, label + ";doc", estimate_from(calib, 0, reps));

    const auto kinds = s.adaptive_kinds;
    std::vector<RunDigest> runs(kinds.size() * reps);
    parallel_for(runs.size(), [&](std::size_t job) {
      const std::size_t r = job % reps;
      EpisodeConfig cfg = s.episode_config(false);
      cfg.record_traces = false;
      auto& st = cfg.stations[k].strategy;
      st.kind = kinds[job / reps];
      st.reference_rate = calib[r].r[k];
      cfg.stations[k].selfish_from = s.selfish.front().from;
      runs[job] = digest(run_episode(cfg, seed, r), s.run.warmup);
    });
    const auto ref = estimate_from(calib, 0, reps);
    for (std::size_t a = 0; a < kinds.size(); ++a) {
      const auto est = estimate_from(runs, a * reps, reps);
      const std::string name = strategies::to_string(kinds[a]);
      add_summary(out, label + ";" + name, est);
      table.rows.push_back({label, name, format_number(est.mean_bps[k]),
                            format_number(est.half_width[k]),
                            format_number(ref.mean_bps[k])});
    }
  }
  out.tables.push_back(std::move(table));
}

void run_coalition(const Scenario& base, std::uint64_t seed,
                   ExperimentResult& out) {
  Table table{"coalition.csv",
              {"param", "a_p", "a_scale", "b_p", "b_scale", "r_a", "r_b", "t_a",
               "t_b", "ref_a", "ref_b", "t_star"},
              {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const auto& sa = s.selfish[0];
    const auto& sb = s.selfish[1];
    const auto params = s.network();
    const double thr_a = analytic::solve_threshold(s.models[sa.station], params);
    const double thr_b = analytic::solve_threshold(s.models[sb.station], params);
    std::vector<double> thr_grid_a, thr_grid_b;
    for (double scale : s.attack_scales) {
      thr_grid_a.push_back(scale * thr_a);
      thr_grid_b.push_back(scale * thr_b);
    }
    const auto ga = strategies::fixed_attack_grid(s.attack_p, thr_grid_a);
    const auto gb = strategies::fixed_attack_grid(s.attack_p, thr_grid_b);
    EpisodeConfig cfg = s.episode_config(true);
    const auto res =
        coalition_sweep(ga, gb, cfg, sa.station, sb.station, s.run.warmup, seed);
    for (const auto& pt : res.points) {
      table.rows.push_back(
          {label, format_number(ga[pt.a_index].fixed_p),
           format_number(ga[pt.a_index].fixed_threshold / thr_a),
           format_number(gb[pt.b_index].fixed_p),
           format_number(gb[pt.b_index].fixed_threshold / thr_b),
           format_number(pt.r_a), format_number(pt.r_b), format_number(pt.t_a),
           format_number(pt.t_b), format_number(res.ref_a),
           format_number(res.ref_b), format_number(res.t_star)});
    }
    out.summary.push_back({label + ";doc", sa.station, res.ref_a, 0.0});
    out.summary.push_back({label + ";doc", sb.station, res.ref_b, 0.0});
  }
  out.tables.push_back(std::move(table));
}

void run_stability(const Scenario& base, std::uint64_t seed,
                   ExperimentResult& out) {
  Table table{"stability.csv", {"param", "cv", "kp", "ki", "stable"}, {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const auto batch =
        run_batch(s.episode_config(true), s.run.replications, s.run.warmup, seed);
    add_summary(out, label, batch.estimate);
    double cv = 0.0;
    for (const auto& run : batch.runs)
      for (std::size_t st = 0; st < s.models.size(); ++st)
        cv += throughput_cv(run, st, s.run.warmup);
    cv /= static_cast<double>(batch.runs.size() * s.models.size());
    // Gains at the analytic operating point, as a station would tune them.
    const auto opt = analytic::optimal_configuration(s.network());
    double P_sum = 0.0;
    for (std::size_t st = 0; st < opt.p.size(); ++st)
      P_sum += control::probability_to_control(opt.p[st], opt.stats[st].hold_time);
    const double K_H = control::estimate_KH(P_sum, s.network().interval_length());
    auto g = control::tune_gains(s.N(), K_H);
    g.Kp *= s.controller.gain_scale;
    g.Ki *= s.controller.gain_scale;
    table.rows.push_back(
        {label, format_number(cv), format_number(g.Kp), format_number(g.Ki),
         control::stability_check(g.Kp, g.Ki, s.N(), K_H) ? "1" : "0"});
    out.traces.push_back({trace_file(label), batch.runs.front().trace});
  }
  out.tables.push_back(std::move(table));
}

void run_reaction(const Scenario& base, std::uint64_t seed,
                  ExperimentResult& out) {
  Table table{"reaction.csv",
              {"param", "replication", "reaction_intervals", "reference_bps"},
              {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const auto& sp = s.selfish.front();
    const double ref =
        analytic::optimal_configuration(s.network()).allocation.r[sp.station];
    const auto batch =
        run_batch(s.episode_config(false), s.run.replications, s.run.warmup, seed);
    add_summary(out, label, batch.estimate);
    for (std::size_t r = 0; r < batch.runs.size(); ++r) {
      const auto react =
          reaction_intervals(batch.runs[r], sp.station, sp.from, ref, 5);
      table.rows.push_back({label, std::to_string(r), std::to_string(react),
                            format_number(ref)});
    }
    out.traces.push_back({trace_file(label), batch.runs.front().trace});
  }
  out.tables.push_back(std::move(table));
}

void run_plain(const Scenario& base, std::uint64_t seed, ExperimentResult& out) {
  Table totals{"episode.csv", {"param", "total_bps", "total_ci"}, {}};
  Table conv{"convergence.csv",
             {"param", "interval", "max_rel_p_error", "channel_time_spread"},
             {}};
  for (std::size_t i = 0; i < base.sweep_points(); ++i) {
    const Scenario s = base.at_sweep_point(i);
    const std::string label = base.sweep_label(i);
    const auto batch =
        run_batch(s.episode_config(false), s.run.replications, s.run.warmup, seed);
    add_summary(out, label, batch.estimate);
    std::vector<double> totals_per_rep;
    for (const auto& run : batch.runs)
      totals_per_rep.push_back(total(episode_throughput(run, s.run.warmup)));
    const auto ci = sim::mean_ci(totals_per_rep);
    totals.rows.push_back(
        {label, format_number(ci.mean), format_number(ci.half_width)});
    if (s.events.empty() && s.selfish.empty()) {
      const auto& run = batch.runs.front();
      for (std::size_t k = 0; k < run.reports.size(); ++k)
        conv.rows.push_back(
            {label, std::to_string(k), format_number(max_relative_p_error(run, k)),
             format_number(channel_time_spread(run, k, s.models.size()))});
    }
    out.traces.push_back({trace_file(label), batch.runs.front().trace});
  }
  out.tables.push_back(std::move(totals));
  if (!conv.rows.empty()) out.tables.push_back(std::move(conv));
}

}  // namespace

sim::ThroughputEstimate doc_throughput(const Scenario& scenario,
                                       std::uint64_t seed) {
  EpisodeConfig cfg = scenario.episode_config(true);
  cfg.stations.resize(scenario.models.size());
  cfg.record_traces = false;
  const auto runs =
      run_grid({cfg}, scenario.run.replications, scenario.run.warmup, seed);
  return estimate_from(runs, 0, scenario.run.replications);
}

sim::ThroughputEstimate baseline_static(const Scenario& scenario,
                                        std::uint64_t seed) {
  const auto params = scenario.network();
  const auto opt = analytic::optimal_configuration(params);
  return run_fixed(params, opt.p, opt.thresholds, measured_intervals(scenario),
                   scenario.run.replications, seed);
}

sim::ThroughputEstimate baseline_nonopportunistic(const Scenario& scenario,
                                                  std::uint64_t seed) {
  const auto params = scenario.network();
  const std::vector<double> thresholds(params.models.size(), 0.0);
  const auto stats = analytic::all_station_stats(params, thresholds);
  const auto p = analytic::solve_optimal_p(stats);
  return run_fixed(params, p, thresholds, measured_intervals(scenario),
                   scenario.run.replications, seed);
}

FairnessMetrics fairness_and_tables(std::span<const double> r) {
  FairnessMetrics m;
  m.fairness = analytic::proportional_fairness(r);
  m.flagged = analytic::is_fairness_flagged(m.fairness);
  double sum = 0.0, sq = 0.0;
  for (double x : r) {
    sum += x;
    sq += x * x;
  }
  m.jain = sq > 0.0 ? sum * sum / (static_cast<double>(r.size()) * sq) : 0.0;
  return m;
}

double throughput_cv(const EpisodeResult& result, std::size_t station,
                     std::size_t first) {
  std::vector<double> x;
  for (std::size_t k = first; k < result.reports.size(); ++k)
    x.push_back(result.reports[k].throughput_bps(station));
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return mean > 0.0 ? sd / mean : std::numeric_limits<double>::infinity();
}

std::int64_t reaction_intervals(const EpisodeResult& result,
                                std::size_t station, std::int64_t from,
                                double reference, std::size_t window) {
  const auto n = static_cast<std::int64_t>(result.reports.size());
  const auto w = static_cast<std::int64_t>(window);
  for (std::int64_t k = from + w - 1; k < n; ++k) {
    double sum = 0.0;
    for (std::int64_t j = k - w + 1; j <= k; ++j)
      sum += result.reports[j].throughput_bps(station);
    if (sum / static_cast<double>(w) <= reference) return k + 1 - from;
  }
  return -1;
}

double max_relative_p_error(const EpisodeResult& result, std::size_t k) {
  double worst = 0.0;
  const auto& p = result.p_history.at(k);
  for (std::size_t i = 0; i < result.optimal_p.size(); ++i)
    worst = std::max(worst,
                     std::abs(p[i] - result.optimal_p[i]) / result.optimal_p[i]);
  return worst;
}

double channel_time_spread(const EpisodeResult& result, std::size_t k,
                           std::size_t stations) {
  const auto& t = result.reports.at(k).t;
  const auto end = t.begin() + static_cast<std::ptrdiff_t>(stations);
  const auto [lo, hi] = std::minmax_element(t.begin(), end);
  const double t_star = result.interval_length / static_cast<double>(stations);
  return (*hi - *lo) / t_star;
}

ExperimentResult run_scenario(const Scenario& scenario, std::uint64_t seed) {
  ExperimentResult out;
  out.scenario = scenario.name;
  const std::string& kind = scenario.experiment;
  if (kind == "fairness")
    run_fairness(scenario, seed, out);
  else if (kind == "attack_grid")
    run_attack_grid(scenario, seed, out);
  else if (kind == "adaptive")
    run_adaptive(scenario, seed, out);
  else if (kind == "coalition")
    run_coalition(scenario, seed, out);
  else if (kind == "stability")
    run_stability(scenario, seed, out);
  else if (kind == "reaction")
    run_reaction(scenario, seed, out);
  else
    run_plain(scenario, seed, out);
  return out;
}

std::filesystem::path make_output_dir(const std::filesystem::path& root,
                                      const std::string& scenario) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm);
  auto dir = root / scenario / stamp;
  for (int suffix = 1; std::filesystem::exists(dir); ++suffix)
    dir = root / scenario / (std::string(stamp) + "-" + std::to_string(suffix));
  std::filesystem::create_directories(dir);
  return dir;
}

namespace {

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << (c ? "," : "") << cells[c];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_results(const ExperimentResult& result,
                   const std::filesystem::path& dir) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.summary)
    rows.push_back({r.param, std::to_string(r.station),
                    format_number(r.throughput_bps),
                    format_number(r.ci_halfwidth)});
  write_table(dir / "summary.csv",
              {"param", "station", "throughput_bps", "ci_halfwidth"}, rows);
  for (const auto& t : result.tables) write_table(dir / t.file, t.header, t.rows);
  for (const auto& tf : result.traces) {
    rows.clear();
    for (const auto& r : tf.rows)
      rows.push_back({std::to_string(r.interval), std::to_string(r.station),
                      format_number(r.p), format_number(r.P), format_number(r.E),
                      format_number(r.F), format_number(r.t),
                      format_number(r.bits), std::to_string(r.successes)});
    write_table(dir / tf.file,
                {"interval", "station", "p", "P", "E", "F", "t", "bits",
                 "successes"},
                rows);
  }
}

}  // namespace docsim::experiments
