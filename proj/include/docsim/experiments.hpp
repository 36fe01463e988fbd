#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "docsim/episode.hpp"
#include "docsim/scenario.hpp"

namespace docsim::experiments {

struct SummaryRow {
  std::string param;
  std::size_t station = 0;
  double throughput_bps = 0.0;
  double ci_halfwidth = 0.0;
};

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct TraceFile {
  std::string file;
  std::vector<TraceRow> rows;
};

struct ExperimentResult {
  std::string scenario;
  std::vector<SummaryRow> summary;
  std::vector<Table> tables;
  std::vector<TraceFile> traces;
};

/// Replicated episodes of one scenario point.
struct EpisodeBatch {
  std::vector<EpisodeResult> runs;
  sim::ThroughputEstimate estimate;  // over [warmup, intervals)
};

/// Runs scenario.run.replications episodes in parallel. Replication r uses
/// stream (seed, r), so results do not depend on the thread count.
EpisodeBatch run_batch(const EpisodeConfig& config, std::size_t replications,
                       std::size_t warmup, std::uint64_t seed);

/// Throughput of the base stations with every station running DOC.
sim::ThroughputEstimate doc_throughput(const Scenario& scenario,
                                       std::uint64_t seed);

/// p and thresholds pinned to the analytic optimum, no controller.
sim::ThroughputEstimate baseline_static(const Scenario& scenario,
                                        std::uint64_t seed);

/// Thresholds 0 and the optimal access probabilities for hold T + tau.
sim::ThroughputEstimate baseline_nonopportunistic(const Scenario& scenario,
                                                  std::uint64_t seed);

struct FairnessMetrics {
  double fairness = 0.0;  // sum_i ln r_i
  double jain = 0.0;      // (sum r)^2 / (N sum r^2)
  bool flagged = false;   // some r_i is zero; fairness omitted
};
FairnessMetrics fairness_and_tables(std::span<const double> r);

/// Coefficient of variation of one station's per-interval throughput over
/// intervals [first, end).
double throughput_cv(const EpisodeResult& result, std::size_t station,
                     std::size_t first);

/// Intervals after `from` until the trailing `window` mean of the station's
/// throughput first drops to `reference` or below; -1 when it never does.
std::int64_t reaction_intervals(const EpisodeResult& result,
                                std::size_t station, std::int64_t from,
                                double reference, std::size_t window);

/// Largest relative error |p_i - p_i*| / p_i* over base stations in interval k.
double max_relative_p_error(const EpisodeResult& result, std::size_t k);

/// (max_i t_i - min_i t_i) / t* over base stations in interval k.
double channel_time_spread(const EpisodeResult& result, std::size_t k,
                           std::size_t stations);

ExperimentResult run_scenario(const Scenario& scenario, std::uint64_t seed);

/// results/<scenario>/<UTC timestamp>, created.
std::filesystem::path make_output_dir(const std::filesystem::path& root,
                                      const std::string& scenario);

void write_results(const ExperimentResult& result,
                   const std::filesystem::path& dir);

/// Shortest round-trip decimal text of a double.
std::string format_number(double value);

}  // namespace docsim::experiments
