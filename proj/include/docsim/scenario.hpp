#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "docsim/episode.hpp"

namespace docsim {

/// Thrown for malformed or inconsistent scenario files.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSettings {
  std::int64_t intervals = 300;
  std::size_t warmup = 100;
  std::size_t replications = 5;
  sim::Engine engine = sim::Engine::kAggregated;
};

struct SelfishSpec {
  std::size_t station = 0;
  strategies::Strategy strategy;  // fixed_threshold unresolved, see below
  double threshold_scale = 1.0;   // fixed threshold = scale * honest threshold
  std::int64_t from = 0;
};

/// A station outside the base population that joins and later leaves.
struct EventSpec {
  std::int64_t join = 0;
  std::int64_t leave = std::numeric_limits<std::int64_t>::max();
  channel::RateModel model;
  double initial_p = 0.5;
};

struct SweepSpec {
  std::string key;
  std::vector<nlohmann::json> values;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string experiment = "episode";
  int tx_slots = 10;
  std::int64_t interval_slots = 100000;
  std::vector<channel::RateModel> models;  // base stations
  strategies::ControllerConfig controller;
  double initial_p = std::numeric_limits<double>::quiet_NaN();
  RunSettings run;
  std::vector<SelfishSpec> selfish;
  std::vector<EventSpec> events;
  std::optional<SweepSpec> sweep;
  std::vector<double> attack_p;
  std::vector<double> attack_scales;
  std::vector<strategies::StrategyKind> adaptive_kinds;
  nlohmann::json normalized;  // scenario with defaults filled in

  int N() const { return static_cast<int>(models.size()); }
  NetworkParams network() const;

  /// Episode with the selfish and event stations applied. With
  /// `honest_only` every base station runs DOC.
  EpisodeConfig episode_config(bool honest_only = false) const;

  std::size_t sweep_points() const { return sweep ? sweep->values.size() : 1; }
  /// Scenario with the sweep key set to its i-th value and no sweep axis.
  Scenario at_sweep_point(std::size_t i) const;
  /// "key=value" label of sweep point i, or "base".
  std::string sweep_label(std::size_t i) const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Dotted leaf paths of a JSON document; array elements use their index.
std::vector<std::string> leaf_paths(const nlohmann::json& doc);

/// Sets a dotted key. The key must already exist unless `allow_new` is set.
/// The value text is parsed as JSON when possible, otherwise taken as a
/// string.
void apply_override(nlohmann::json& doc, const std::string& key,
                    const std::string& value_text, bool allow_new = false);

}  // namespace docsim
