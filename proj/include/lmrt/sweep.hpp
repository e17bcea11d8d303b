#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lmrt/schedule.hpp"
#include "lmrt/stats.hpp"

namespace lmrt {

using Json = nlohmann::json;

/// Schedule from a JSON object:
///   {"type": "mesoscopic", "beta": b}
///   {"type": "macroscopic", "theta": t}
///   {"type": "sarrt_uniform", "theta": t}      V ~ U[t, 1]
///   {"type": "full_memory"}                  j == 1, no forgetting
///   {"type": "custom_j", "j": [j(1), j(2), ...]}
MemorySchedule schedule_from_json(const Json& spec);

/// Custom schedule backed by a table; j(m) = table[m-1].
MemorySchedule custom_from_table(std::vector<Label> table, std::string name = "table");

struct StatisticsRequest {
  bool height = false;
  bool degree_hist = false;
  bool chain = false;
  bool spine = false;
  std::optional<std::size_t> fringe_cap;
  std::optional<std::size_t> branchpoints_k;

  bool empty() const {
    return !height && !degree_hist && !chain && !spine && !fringe_cap &&
           !branchpoints_k;
  }
};

struct Comparison {
  std::string name;
  std::string metric;
  std::string aggregate = "mean";  // mean, variance, min, max, q05, q50, q95
  std::optional<Label> n;          // default: largest n
  double reference = 0.0;
  double threshold = 0.0;
  bool relative = false;  // distance divided by |reference|
};

struct SweepConfig {
  Json schedule_spec;
  std::vector<Label> n;
  std::uint64_t replications = 1;
  std::uint64_t master_seed = 0;
  StatisticsRequest statistics;
  std::vector<Comparison> comparisons;
  std::string json_path;  // empty: not written
  std::string csv_path;
  std::string resume_path;  // partial report to continue from
  std::optional<unsigned> threads;

  static SweepConfig from_json(const Json& j);

  /// Everything that determines the results; excludes threads and paths.
  Json to_json() const;

  /// FNV-1a 64 of to_json().dump(), as 16 hex digits.
  std::string digest() const;

  void validate() const;
};

struct CellRecord {
  Label n = 0;
  std::uint64_t rep = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
};

struct ComparisonResult {
  std::string name;
  std::string metric;
  Label n = 0;
  std::string aggregate;
  double value = 0.0;
  double reference = 0.0;
  double distance = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

using Aggregates = std::map<Label, std::map<std::string, Summary>>;

struct ReplicationReport {
  Json config;
  std::string config_digest;
  std::string generator;
  std::vector<CellRecord> cells;  // ordered by (n index, rep)
  Aggregates aggregates;
  std::vector<ComparisonResult> comparisons;
  bool complete = true;
  std::uint64_t resume_from = 0;  // first missing cell index when incomplete

  bool all_pass() const;
  Json to_json() const;
  static ReplicationReport from_json(const Json& j);

  /// `n,rep,seed,<metric>...` with 17 significant digits.
  void write_csv(std::ostream& out) const;
};

/// Per-n summaries of every metric, independent of record order.
Aggregates aggregate_cells(const std::vector<CellRecord>& cells);

double aggregate_value(const Summary& s, const std::string& name);

/// Runs every (n, replication) cell with seed derive_seed(master_seed,
/// n_index * replications + rep). Output does not depend on thread count.
/// Writes the JSON/CSV artifacts named in the config. If a cell fails, the
/// completed cells are written with "complete": false and "resume_from",
/// then the error is rethrown.
ReplicationReport run_sweep(const SweepConfig& config);

/// Metrics of a single cell (exposed for tests).
std::map<std::string, double> cell_metrics(const MemorySchedule& schedule,
                                           const StatisticsRequest& stats,
                                           Label n, std::uint64_t seed);

}  // namespace lmrt
