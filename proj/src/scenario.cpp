#include "docsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace docsim {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key))
      throw ScenarioError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError(where + "." + key + ": " + e.what());
  }
}

json default_channel() {
  return json{{"kind", "iid-rayleigh"},
              {"W", 1e7},
              {"rho", 1.0},
              {"doppler", 2.0 * M_PI / 100.0},
              {"rates_mbps", json::array({1, 2, 5.5, 12, 24, 48, 54})}};
}

channel::RateModel channel_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown(j, where, {"kind", "W", "rho", "doppler", "rates_mbps", "rate"});
  channel::RateModel m;
  try {
    m.kind = channel::channel_kind_from_string(j.at("kind").get<std::string>());
  } catch (const std::exception& e) {
    throw ScenarioError(where + ".kind: " + e.what());
  }
  m.bandwidth = get_or<double>(j, "W", 1e7, where);
  m.rho = get_or<double>(j, "rho", 1.0, where);
  m.doppler = get_or<double>(j, "doppler", 0.0, where);
  for (double r : get_or<std::vector<double>>(j, "rates_mbps", {}, where))
    m.rate_table.push_back(r * 1e6);
  m.constant_rate = get_or<double>(j, "rate", 0.0, where);
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(where + ": " + e.what());
  }
  return m;
}

strategies::ControllerConfig controller_from_json(const json& j) {
  strategies::ControllerConfig c;
  const std::string mode = j.at("gain_mode").get<std::string>();
  if (mode == "ziegler-nichols")
    c.gain_mode = strategies::GainMode::kZieglerNichols;
  else if (mode == "manual")
    c.gain_mode = strategies::GainMode::kManual;
  else
    throw ScenarioError("controller.gain_mode: unknown mode '" + mode + "'");
  const std::string kh = j.at("kh_estimate").get<std::string>();
  if (kh == "own-control")
    c.kh_estimate = strategies::KhEstimate::kOwnControl;
  else if (kh == "operating-point")
    c.kh_estimate = strategies::KhEstimate::kOperatingPoint;
  else
    throw ScenarioError("controller.kh_estimate: unknown estimate '" + kh + "'");
  c.Kp = j.at("Kp").get<double>();
  c.Ki = j.at("Ki").get<double>();
  c.gain_scale = j.at("gain_scale").get<double>();
  c.punishment_scale = j.at("punishment_scale").get<double>();
  if (c.gain_mode == strategies::GainMode::kManual && !(c.Kp > 0.0 && c.Ki > 0.0))
    throw ScenarioError("controller: manual gains need Kp > 0 and Ki > 0");
  if (!(c.gain_scale > 0.0))
    throw ScenarioError("controller.gain_scale must be positive");
  return c;
}

strategies::Strategy strategy_from_json(const json& j, const std::string& where,
                                        double* threshold_scale) {
  require_object(j, where);
  reject_unknown(j, where, {"kind", "p", "threshold_scale", "hysteresis_low"});
  strategies::Strategy s;
  try {
    s.kind = strategies::strategy_kind_from_string(
        get_or<std::string>(j, "kind", "doc", where));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(where + ".kind: " + e.what());
  }
  s.fixed_p = get_or<double>(j, "p", 1.0, where);
  s.hysteresis_low = get_or<double>(j, "hysteresis_low", 0.95, where);
  *threshold_scale = get_or<double>(j, "threshold_scale", 1.0, where);
  if (!(s.fixed_p >= 0.0 && s.fixed_p <= 1.0))
    throw ScenarioError(where + ".p must lie in [0, 1]");
  if (!(*threshold_scale >= 0.0))
    throw ScenarioError(where + ".threshold_scale must be >= 0");
  return s;
}

json normalize(const json& doc) {
  require_object(doc, "scenario");
  reject_unknown(doc, "scenario",
                 {"name", "description", "experiment", "network", "channel",
                  "stations", "controller", "run", "selfish", "events",
                  "sweep", "attack", "adaptive"});
  json out = doc;
  if (!out.contains("name")) throw ScenarioError("scenario needs a name");
  if (!out.contains("description")) out["description"] = "";
  if (!out.contains("experiment")) out["experiment"] = "episode";

  json net = {{"N", 10}, {"T_tx", 10}, {"T_total", 100000}};
  if (doc.contains("network")) {
    require_object(doc["network"], "network");
    reject_unknown(doc["network"], "network", {"N", "T_tx", "T_total"});
    net.update(doc["network"]);
  }
  out["network"] = net;

  json ch = default_channel();
  if (doc.contains("channel")) {
    require_object(doc["channel"], "channel");
    ch.update(doc["channel"]);
  }
  out["channel"] = ch;

  json ctl = {{"gain_mode", "ziegler-nichols"}, {"kh_estimate", "own-control"},
              {"Kp", 0.0},  {"Ki", 0.0},
              {"gain_scale", 1.0}, {"punishment_scale", 1.0},
              {"initial_p", "optimal"}};
  if (doc.contains("controller")) {
    require_object(doc["controller"], "controller");
    reject_unknown(doc["controller"], "controller",
                   {"gain_mode", "kh_estimate", "Kp", "Ki", "gain_scale",
                    "punishment_scale", "initial_p"});
    ctl.update(doc["controller"]);
  }
  out["controller"] = ctl;

  json run = {{"intervals", 300}, {"warmup", 100}, {"replications", 5},
              {"engine", "aggregated"}};
  if (doc.contains("run")) {
    require_object(doc["run"], "run");
    reject_unknown(doc["run"], "run",
                   {"intervals", "warmup", "replications", "engine"});
    run.update(doc["run"]);
  }
  out["run"] = run;

  json attack = {{"p_grid", json::array()}, {"threshold_scales", json::array()}};
  for (int k = 1; k <= 20; ++k) attack["p_grid"].push_back(k / 20.0);
  for (int k = 0; k <= 8; ++k) attack["threshold_scales"].push_back(k / 4.0);
  if (doc.contains("attack")) {
    require_object(doc["attack"], "attack");
    reject_unknown(doc["attack"], "attack", {"p_grid", "threshold_scales"});
    attack.update(doc["attack"]);
  }
  out["attack"] = attack;

  json adaptive = {
      {"kinds", {"adaptive-p", "adaptive-threshold", "adaptive-both"}}};
  if (doc.contains("adaptive")) {
    require_object(doc["adaptive"], "adaptive");
    reject_unknown(doc["adaptive"], "adaptive", {"kinds"});
    adaptive.update(doc["adaptive"]);
  }
  out["adaptive"] = adaptive;

  if (!out.contains("stations")) out["stations"] = json::array({json::object()});
  if (!out.contains("selfish")) out["selfish"] = json::array();
  if (!out.contains("events")) out["events"] = json::array();
  return out;
}

sim::Engine engine_from_string(const std::string& name) {
  if (name == "aggregated") return sim::Engine::kAggregated;
  if (name == "per-slot") return sim::Engine::kPerSlot;
  throw ScenarioError("run.engine: unknown engine '" + name + "'");
}

}  // namespace

NetworkParams Scenario::network() const {
  NetworkParams p;
  p.tx_slots = tx_slots;
  p.interval_slots = interval_slots;
  p.models = models;
  return p;
}

EpisodeConfig Scenario::episode_config(bool honest_only) const {
  EpisodeConfig cfg;
  cfg.tx_slots = tx_slots;
  cfg.interval_slots = interval_slots;
  cfg.controller = controller;
  cfg.intervals = run.intervals;
  cfg.engine = run.engine;
  const NetworkParams params = network();
  for (const auto& m : models) {
    StationSetup s;
    s.model = m;
    s.initial_p = initial_p;
    cfg.stations.push_back(s);
  }
  if (!honest_only) {
    for (const auto& sp : selfish) {
      auto& st = cfg.stations[sp.station];
      st.strategy = sp.strategy;
      st.strategy.fixed_threshold =
          sp.threshold_scale * analytic::solve_threshold(st.model, params);
      st.selfish_from = sp.from;
    }
  }
  for (const auto& ev : events) {
    StationSetup s;
    s.model = ev.model;
    s.join_interval = ev.join;
    s.leave_interval = ev.leave;
    s.initial_p = ev.initial_p;
    cfg.stations.push_back(s);
  }
  return cfg;
}

Scenario Scenario::at_sweep_point(std::size_t i) const {
  if (!sweep) return *this;
  json doc = normalized;
  doc.erase("sweep");
  apply_override(doc, sweep->key, sweep->values.at(i).dump());
  return parse_scenario(doc);
}

std::string Scenario::sweep_label(std::size_t i) const {
  if (!sweep) return "base";
  const auto dot = sweep->key.rfind('.');
  const std::string leaf =
      dot == std::string::npos ? sweep->key : sweep->key.substr(dot + 1);
  const json& v = sweep->values.at(i);
  return leaf + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
}

Scenario parse_scenario(const json& doc) {
  Scenario s;
  json n;
  try {
    n = normalize(doc);
    s.normalized = n;
    s.name = n.at("name").get<std::string>();
    s.description = n.at("description").get<std::string>();
    s.experiment = n.at("experiment").get<std::string>();
    static const std::set<std::string> kinds = {
        "fairness", "attack_grid", "adaptive", "coalition",
        "stability", "reaction", "episode"};
    if (!kinds.count(s.experiment))
      throw ScenarioError("unknown experiment '" + s.experiment + "'");

    const json& net = n["network"];
    const int N = net.at("N").get<int>();
    s.tx_slots = net.at("T_tx").get<int>();
    s.interval_slots = net.at("T_total").get<std::int64_t>();
    if (N < 1) throw ScenarioError("network.N must be >= 1");
    if (s.tx_slots < 1) throw ScenarioError("network.T_tx must be >= 1");
    if (s.interval_slots < 10 * (s.tx_slots + 1))
      throw ScenarioError("network.T_total is too short for one interval");

    const json& groups = n["stations"];
    if (!groups.is_array() || groups.empty())
      throw ScenarioError("stations must be a nonempty array");
    int assigned = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::string where = "stations." + std::to_string(g);
      const json& grp = groups[g];
      require_object(grp, where);
      reject_unknown(grp, where, {"count", "share", "channel"});
      int count = 0;
      if (grp.contains("count")) {
        count = grp["count"].get<int>();
      } else if (grp.contains("share")) {
        count = static_cast<int>(std::lround(grp["share"].get<double>() * N));
      } else if (g + 1 == groups.size()) {
        count = N - assigned;
      } else {
        throw ScenarioError(where + " needs count or share");
      }
      if (g + 1 == groups.size() && !grp.contains("count")) count = N - assigned;
      if (count < 0) throw ScenarioError(where + " has a negative count");
      json ch = n["channel"];
      if (grp.contains("channel")) ch.update(grp["channel"]);
      const auto model = channel_from_json(ch, where + ".channel");
      for (int k = 0; k < count; ++k) s.models.push_back(model);
      assigned += count;
    }
    if (assigned != N)
      throw ScenarioError("station groups total " + std::to_string(assigned) +
                          " stations but network.N is " + std::to_string(N));

    s.controller = controller_from_json(n["controller"]);
    const json& ip = n["controller"]["initial_p"];
    if (ip.is_number()) {
      s.initial_p = ip.get<double>();
      if (!(s.initial_p > 0.0 && s.initial_p < 1.0))
        throw ScenarioError("controller.initial_p must lie in (0, 1)");
    } else if (!(ip.is_string() && ip.get<std::string>() == "optimal")) {
      throw ScenarioError("controller.initial_p must be a number or \"optimal\"");
    }

    const json& run = n["run"];
    s.run.intervals = run.at("intervals").get<std::int64_t>();
    const auto warmup = run.at("warmup").get<std::int64_t>();
    const auto reps = run.at("replications").get<std::int64_t>();
    s.run.engine = engine_from_string(run.at("engine").get<std::string>());
    if (s.run.intervals < 0) throw ScenarioError("run.intervals must be >= 0");
    if (warmup < 0 || warmup > s.run.intervals)
      throw ScenarioError("run.warmup must lie in [0, run.intervals]");
    if (reps < 1) throw ScenarioError("run.replications must be >= 1");
    s.run.warmup = static_cast<std::size_t>(warmup);
    s.run.replications = static_cast<std::size_t>(reps);

    const json& selfish = n["selfish"];
    if (!selfish.is_array()) throw ScenarioError("selfish must be an array");
    for (std::size_t k = 0; k < selfish.size(); ++k) {
      const std::string where = "selfish." + std::to_string(k);
      const json& e = selfish[k];
      require_object(e, where);
      reject_unknown(e, where, {"station", "strategy", "from"});
      SelfishSpec sp;
      const auto idx = get_or<long>(e, "station", -1, where);
      const long resolved = idx < 0 ? N + idx : idx;
      if (resolved < 0 || resolved >= N)
        throw ScenarioError(where + ".station is out of range");
      sp.station = static_cast<std::size_t>(resolved);
      sp.strategy = strategy_from_json(e.contains("strategy") ? e["strategy"]
                                                              : json::object(),
                                       where + ".strategy", &sp.threshold_scale);
      sp.from = get_or<std::int64_t>(e, "from", 0, where);
      s.selfish.push_back(sp);
    }

    const json& events = n["events"];
    if (!events.is_array()) throw ScenarioError("events must be an array");
    for (std::size_t k = 0; k < events.size(); ++k) {
      const std::string where = "events." + std::to_string(k);
      const json& e = events[k];
      require_object(e, where);
      reject_unknown(e, where, {"join", "leave", "channel", "initial_p"});
      EventSpec ev;
      ev.join = get_or<std::int64_t>(e, "join", 0, where);
      ev.leave = get_or<std::int64_t>(e, "leave", ev.leave, where);
      ev.initial_p = get_or<double>(e, "initial_p", 0.5, where);
      json ch = n["channel"];
      if (e.contains("channel")) ch.update(e["channel"]);
      ev.model = channel_from_json(ch, where + ".channel");
      if (ev.join < 0 || ev.leave <= ev.join)
        throw ScenarioError(where + " leaves before it joins");
      s.events.push_back(ev);
    }

    if (n.contains("sweep")) {
      const json& sw = n["sweep"];
      require_object(sw, "sweep");
      reject_unknown(sw, "sweep", {"key", "values"});
      SweepSpec sp;
      sp.key = sw.at("key").get<std::string>();
      for (const auto& v : sw.at("values")) sp.values.push_back(v);
      if (sp.values.empty()) throw ScenarioError("sweep.values is empty");
      s.sweep = sp;
    }

    s.attack_p = n["attack"]["p_grid"].get<std::vector<double>>();
    s.attack_scales = n["attack"]["threshold_scales"].get<std::vector<double>>();
    if (s.attack_p.empty() || s.attack_scales.empty())
      throw ScenarioError("attack grids must be nonempty");
    for (double p : s.attack_p)
      if (!(p >= 0.0 && p <= 1.0))
        throw ScenarioError("attack.p_grid entries must lie in [0, 1]");
    for (const auto& k : n["adaptive"]["kinds"]) {
      const auto kind =
          strategies::strategy_kind_from_string(k.get<std::string>());
      if (!strategies::is_adaptive(kind))
        throw ScenarioError("adaptive.kinds lists a non-adaptive strategy");
      s.adaptive_kinds.push_back(kind);
    }

    if ((s.experiment == "attack_grid" || s.experiment == "adaptive" ||
         s.experiment == "reaction") &&
        s.selfish.empty())
      throw ScenarioError(s.experiment + " needs a selfish station");
    if (s.experiment == "coalition" &&
        (s.selfish.size() < 2 || s.selfish[0].station == s.selfish[1].station))
      throw ScenarioError("coalition needs two distinct selfish stations");
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  if (s.sweep) {
    // Every sweep point has to parse on its own.
    for (std::size_t i = 0; i < s.sweep->values.size(); ++i) {
      json doc = s.normalized;
      doc.erase("sweep");
      apply_override(doc, s.sweep->key, s.sweep->values[i].dump());
      parse_scenario(doc);
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

namespace {

void collect_leaves(const json& j, const std::string& prefix,
                    std::vector<std::string>& out) {
  if (j.is_object() && !j.empty()) {
    for (const auto& [key, value] : j.items())
      collect_leaves(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i)
      collect_leaves(j[i], prefix + "." + std::to_string(i), out);
  } else {
    out.push_back(prefix);
  }
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

std::vector<std::string> leaf_paths(const json& doc) {
  std::vector<std::string> out;
  collect_leaves(doc, "", out);
  return out;
}

void apply_override(json& doc, const std::string& key,
                    const std::string& value_text, bool allow_new) {
  if (key.empty()) throw ScenarioError("empty override key");
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);

  json* node = &doc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    const std::string& part = parts[i];
    if (node->is_array() && is_index(part)) {
      const auto idx = std::stoul(part);
      if (idx >= node->size()) throw ScenarioError("unknown override key '" + key + "'");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(part)) {
        if (!allow_new)
          throw ScenarioError("unknown override key '" + key + "'");
        (*node)[part] = last ? json() : json::object();
      }
      node = &(*node)[part];
    } else {
      throw ScenarioError("unknown override key '" + key + "'");
    }
  }
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;
  }
  *node = value;
}

}  // namespace docsim
