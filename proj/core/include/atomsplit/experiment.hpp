// SPDX-License-Identifier: Apache-2.0
//
// Run configuration, figure presets, parallel ensemble orchestration, result
// files and the oracle comparison harness.

#ifndef ATOMSPLIT_EXPERIMENT_HPP
#define ATOMSPLIT_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atomsplit/estimator.hpp"
#include "atomsplit/integrator.hpp"
#include "atomsplit/model.hpp"

namespace atomsplit {

/// Pi / (2 sqrt 2): first complete transfer out of the middle well at J = 1.
inline constexpr double kTransferTime = 1.1107207345395915;

/// Divergent-trajectory fraction above which a run is rejected.
inline constexpr double kMaxDivergentFraction = 1e-4;

enum class RunMode { positive_p, oracle, compare };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// Thrown for invalid configuration; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when too many trajectories diverge; maps to exit code 3.
class DivergenceBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelParams model;
  IntegratorConfig integrator;
  std::uint64_t trajectories = 10000;
  std::uint64_t seed = 1;
  std::size_t batches = 64;
  std::string output_path = "result.csv";
  RunMode mode = RunMode::positive_p;

  /// Throws ConfigError.  Everything is checked before any work starts.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Key-value text format, one `key = value` per line, `#` starts a comment.
// Keys: n_wells, j, j_cutoff, chi, chi_cutoff, n_atoms, initial_state_kind,
// initial_well, dt, scheme, sample_interval, t_final, divergence_cap,
// trajectories, seed, batches, output_path, mode.  Cutoffs take a time or
// `none`.  Unknown or repeated keys are errors; omitted keys keep defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(std::string_view json_text);

/// Preset names in table order.
const std::vector<std::string>& preset_names();

/// Parameters of a named preset.  `scale` divides the trajectory count
/// (rounded to nearest, at least 1).  Throws ConfigError for unknown names.
RunConfig preset(std::string_view name, double scale = 1.0);

/// Integrates cfg.trajectories trajectories on `workers` threads and merges
/// the accumulators in trajectory order; the result is bitwise independent
/// of the worker count.
MomentAccumulator simulate_ensemble(const RunConfig& cfg, unsigned workers);

/// Exact evolution on the configuration's sample grid.
TimeSeriesResult run_oracle(const RunConfig& cfg);

/// CSV with the fixed column order
/// t,n1,n1_se,n2,n2_se,n3,n3_se,vn1,vn2,vn3,vn13,vn13_se,xi13,xi13_se,
/// xis1,xis1_se,xis3,xis3_se,imag_residual; values printed with 17
/// significant digits.
void write_csv(std::ostream& out, const TimeSeriesResult& result);
const std::vector<std::string>& csv_columns();

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct ObservableCheck {
  std::string observable;
  double max_abs_z = 0.0;
  double worst_time = 0.0;
  std::size_t flagged_points = 0;
  bool has_se = true;
};

struct ComparisonReport {
  std::vector<ObservableCheck> checks;
  double z_threshold = 4.0;
  bool pass = true;

  std::string to_json() const;
};

/// Per-observable, per-time z = (a - b) / sqrt(se_a^2 + se_b^2).  A point is
/// flagged when |z| > z_threshold; a zero combined error with a nonzero
/// difference counts as infinite z.  Columns without a standard-error column
/// (vn1, vn2, vn3) are reported but not scored.  Throws std::invalid_argument
/// if the time grids or column sets differ.
ComparisonReport compare(const CsvTable& a, const CsvTable& b, double z_threshold = 4.0);

/// Same check on in-memory results, scoring every observable including
/// V(N_j), whose errors the CSV schema does not carry.
ComparisonReport compare(const TimeSeriesResult& a, const TimeSeriesResult& b, double z_threshold = 4.0);

struct RunSummary {
  TimeSeriesResult result;
  std::uint64_t divergent = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
  ComparisonReport comparison;  // filled in compare mode
};

/// Executes a configuration: writes the CSV and a `<csv>.meta.json` sidecar
/// (config echo, build id, source, divergent count, wall time).  In compare
/// mode the oracle CSV goes to `<stem>.oracle.csv` and a report to
/// `<stem>.compare.json`.  Throws DivergenceBreach after writing when the
/// divergent fraction exceeds kMaxDivergentFraction.
RunSummary run(const RunConfig& cfg, unsigned workers);

/// Identifier of this build, e.g. the output of `git describe`.
std::string build_id();

}  // namespace atomsplit

#endif  // ATOMSPLIT_EXPERIMENT_HPP
