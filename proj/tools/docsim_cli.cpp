// docsim: solve, run, sweep and validate DOC scenarios.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "docsim/experiments.hpp"
#include "docsim/scenario.hpp"

using namespace docsim;
using nlohmann::json;

namespace {

struct Options {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out = "results";
  std::vector<std::string> overrides;
  std::string sweep_key;
  std::string sweep_values;
};

Scenario load_with_overrides(const Options& opt) {
  std::ifstream in(opt.scenario);
  if (!in) throw ScenarioError("cannot open scenario file " + opt.scenario);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(opt.scenario + ": " + e.what());
  }
  json normalized = parse_scenario(doc).normalized;
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("override '" + kv + "' is not key=value");
    try {
      apply_override(normalized, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const ScenarioError& e) {
      std::string msg = std::string(e.what()) + "\nvalid keys:";
      for (const auto& key : leaf_paths(normalized)) msg += "\n  " + key;
      throw ScenarioError(msg);
    }
  }
  if (!opt.sweep_key.empty()) {
    json values;
    try {
      values = json::parse(opt.sweep_values);
    } catch (const json::parse_error& e) {
      throw ScenarioError(std::string("--values: ") + e.what());
    }
    if (!values.is_array()) throw ScenarioError("--values must be a JSON array");
    normalized["sweep"] = {{"key", opt.sweep_key}, {"values", values}};
  }
  return parse_scenario(normalized);
}

int cmd_validate(const Options& opt) {
  const Scenario s = load_with_overrides(opt);
  std::printf("ok: %s (%s, N=%d, %zu sweep point%s)\n", s.name.c_str(),
              s.experiment.c_str(), s.N(), s.sweep_points(),
              s.sweep_points() == 1 ? "" : "s");
  return 0;
}

int cmd_solve(const Options& opt) {
  const Scenario s = load_with_overrides(opt);
  const NetworkParams params = s.network();
  const auto cfg = analytic::optimal_configuration(params);
  analytic::PminResult pmin;
  const bool has_pmin = s.N() >= 2;
  if (has_pmin) pmin = analytic::solve_pmin(cfg.stats, params);

  double P_sum = 0.0;
  for (std::size_t i = 0; i < cfg.p.size(); ++i)
    P_sum += control::probability_to_control(cfg.p[i], cfg.stats[i].hold_time);
  const double K_H = control::estimate_KH(P_sum, params.interval_length());
  const auto gains = control::tune_gains(s.N(), K_H);

  std::printf("%-8s %-16s %8s %14s %10s %10s %14s %10s\n", "station", "channel",
              "rho", "threshold_bps", "hold", "p*", "r*_bps", "p_min");
  json stations = json::array();
  for (std::size_t i = 0; i < cfg.p.size(); ++i) {
    const auto& m = params.models[i];
    std::printf("%-8zu %-16s %8.3g %14.6g %10.5g %10.6f %14.6g %10s\n", i,
                channel::to_string(m.kind).c_str(), m.rho, cfg.thresholds[i],
                cfg.stats[i].hold_time, cfg.p[i], cfg.allocation.r[i],
                has_pmin ? std::to_string(pmin.p[i]).c_str() : "-");
    stations.push_back({{"station", i},
                        {"channel", channel::to_string(m.kind)},
                        {"rho", m.rho},
                        {"threshold_bps", cfg.thresholds[i]},
                        {"hold_time", cfg.stats[i].hold_time},
                        {"p_star", cfg.p[i]},
                        {"r_star_bps", cfg.allocation.r[i]},
                        {"p_min", has_pmin ? json(pmin.p[i]) : json(nullptr)}});
  }
  std::printf("K_H = %.6g  Kp = %.6g  Ki = %.6g  stable = %s\n", K_H, gains.Kp,
              gains.Ki,
              control::stability_check(gains.Kp, gains.Ki, s.N(), K_H) ? "yes"
                                                                        : "no");
  if (has_pmin) std::printf("Delta = %.6g\n", pmin.delta);

  json out = {{"scenario", s.name},
              {"stations", stations},
              {"K_H", K_H},
              {"Kp", gains.Kp},
              {"Ki", gains.Ki},
              {"Delta", has_pmin ? json(pmin.delta) : json(nullptr)},
              {"fairness", analytic::proportional_fairness(cfg.allocation)}};
  const auto dir = experiments::make_output_dir(opt.out, s.name);
  std::ofstream f(dir / "config.json");
  f << out.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  std::printf("wrote %s\n", (dir / "config.json").c_str());
  return 0;
}

int cmd_run(const Options& opt, bool require_sweep) {
  const Scenario s = load_with_overrides(opt);
  if (require_sweep && !s.sweep)
    throw ScenarioError("scenario has no sweep axis; pass --param and --values");
  const auto result = experiments::run_scenario(s, opt.seed);
  const auto dir = experiments::make_output_dir(opt.out, s.name);
  experiments::write_results(result, dir);

  std::printf("%-40s %8s %16s %14s\n", "param", "station", "throughput_bps",
              "ci_halfwidth");
  const std::size_t shown = std::min<std::size_t>(result.summary.size(), 40);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& r = result.summary[i];
    std::printf("%-40s %8zu %16.6g %14.4g\n", r.param.c_str(), r.station,
                r.throughput_bps, r.ci_halfwidth);
  }
  if (shown < result.summary.size())
    std::printf("... %zu more rows in summary.csv\n", result.summary.size() - shown);
  std::printf("wrote %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed opportunistic scheduling with distributed control"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool writes) {
    cmd->add_option("--scenario", opt.scenario, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", opt.overrides, "Override a scenario key (dotted path)")
        ->type_name("KEY=VALUE");
    if (writes) {
      cmd->add_option("--seed", opt.seed, "Master seed")->capture_default_str();
      cmd->add_option("--out", opt.out, "Output root directory")
          ->capture_default_str();
    }
  };

  auto* solve = app.add_subcommand("solve", "Print the optimal configuration and gains");
  add_common(solve, true);
  auto* run = app.add_subcommand("run", "Run a scenario and write CSV results");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "Run a scenario across a parameter axis");
  add_common(sweep, true);
  sweep->add_option("--param", opt.sweep_key, "Dotted key to sweep");
  sweep->add_option("--values", opt.sweep_values, "JSON array of values");
  auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
  add_common(validate, false);

  CLI11_PARSE(app, argc, argv);
  if (!opt.sweep_key.empty() && opt.sweep_values.empty()) {
    std::fprintf(stderr, "error: --param needs --values\n");
    return 2;
  }

  try {
    if (*solve) return cmd_solve(opt);
    if (*run) return cmd_run(opt, false);
    if (*sweep) return cmd_run(opt, true);
    if (*validate) return cmd_validate(opt);
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
