#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "docsim/analytic.hpp"
#include "docsim/control.hpp"
#include "docsim/experiments.hpp"
#include "docsim/scenario.hpp"

namespace py = pybind11;
using namespace docsim;
using nlohmann::json;

namespace {

Scenario from_text(const std::string& text) {
  try {
    return parse_scenario(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ScenarioError(e.what());
  }
}

py::dict solve(const std::string& text) {
  const Scenario s = from_text(text);
  const auto params = s.network();
  const auto cfg = analytic::optimal_configuration(params);
  py::dict out;
  std::vector<double> holds;
  double P_sum = 0.0;
  for (std::size_t i = 0; i < cfg.p.size(); ++i) {
    holds.push_back(cfg.stats[i].hold_time);
    P_sum += control::probability_to_control(cfg.p[i], cfg.stats[i].hold_time);
  }
  const double K_H = control::estimate_KH(P_sum, params.interval_length());
  const auto gains = control::tune_gains(s.N(), K_H);
  out["p_star"] = cfg.p;
  out["thresholds"] = cfg.thresholds;
  out["hold_times"] = holds;
  out["r_star"] = cfg.allocation.r;
  out["K_H"] = K_H;
  out["Kp"] = gains.Kp;
  out["Ki"] = gains.Ki;
  if (s.N() >= 2) {
    const auto pmin = analytic::solve_pmin(cfg.stats, params);
    out["p_min"] = pmin.p;
    out["delta"] = pmin.delta;
  }
  return out;
}

py::dict run(const std::string& text, std::uint64_t seed) {
  const Scenario s = from_text(text);
  experiments::ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = experiments::run_scenario(s, seed);
  }
  py::list summary;
  for (const auto& r : result.summary)
    summary.append(py::make_tuple(r.param, r.station, r.throughput_bps, r.ci_halfwidth));
  py::dict tables;
  for (const auto& t : result.tables) tables[py::str(t.file)] = py::make_tuple(t.header, t.rows);
  py::dict out;
  out["summary"] = summary;
  out["tables"] = tables;
  return out;
}

py::dict episode(const std::string& text, std::uint64_t seed, std::uint64_t replication,
                 bool honest_only) {
  const Scenario s = from_text(text);
  auto cfg = s.episode_config(honest_only);
  cfg.record_traces = false;
  EpisodeResult res;
  {
    py::gil_scoped_release release;
    res = run_episode(cfg, seed, replication);
  }
  py::dict out;
  out["p"] = res.p_history;
  out["optimal_p"] = res.optimal_p;
  out["throughput_bps"] = episode_throughput(res, s.run.warmup);
  out["channel_time"] = mean_channel_time(res, s.run.warmup);
  return out;
}

}  // namespace

PYBIND11_MODULE(_docsim, m) {
  m.doc() = "DOC simulator core";
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("validate", [](const std::string& text) { return from_text(text).name; },
        py::arg("scenario_json"));
  m.def("solve", &solve, py::arg("scenario_json"));
  m.def("run", &run, py::arg("scenario_json"), py::arg("seed") = 1);
  m.def("episode", &episode, py::arg("scenario_json"), py::arg("seed") = 1,
        py::arg("replication") = 0, py::arg("honest_only") = false);

  m.def("control_to_probability", &control::control_to_probability, py::arg("P"),
        py::arg("hold_time"));
  m.def("probability_to_control", &control::probability_to_control, py::arg("p"),
        py::arg("hold_time"));
  m.def("tune_gains",
        [](int N, double K_H) {
          const auto g = control::tune_gains(N, K_H);
          return py::make_tuple(g.Kp, g.Ki);
        },
        py::arg("N"), py::arg("K_H"));
  m.def("stability_check", &control::stability_check, py::arg("Kp"), py::arg("Ki"),
        py::arg("N"), py::arg("K_H"));
  m.def("punishment_F",
        [](const std::vector<double>& t, double p_i, int N, double t_star, double p_min,
           double delta) {
          return control::punishment_F(t, p_i, {N, t_star, p_min, delta});
        },
        py::arg("t"), py::arg("p_i"), py::arg("N"), py::arg("t_star"), py::arg("p_min"),
        py::arg("delta"));
}
