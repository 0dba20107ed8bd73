#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aircomp/dynamic.hpp"

namespace aircomp {

// Exhaustive search over cluster partitions into <= J groups and, per group, over all
// patterns with phases from {2 pi q / Q}. Every cluster uses E_max in its single slot.
// Needs equal weights (the best group pattern then maximizes sum_l E gamma_l / sigma_l^2).
// Throws ConfigError when Q^N times the partition count exceeds 1e7.
Solution oracle_grid_search(const SystemConfig& config, const ChannelSet& channels, int J, int phase_levels);

// Number of partitions of `n` labelled items into at most `k` nonempty groups.
std::uint64_t partition_count(int n, int k);

// Best of `draws` sets of J uniformly random patterns; each cluster takes the pattern
// with its largest gain. Seeded from config.seed, independent of the channel stream.
Solution baseline_random(const SystemConfig& config, const ChannelSet& channels, int J, int draws = 1);

// Direct links only.
Solution baseline_no_irs(const SystemConfig& config, const ChannelSet& channels);

enum class SweepAxis { N, J, E_max, seeds };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);  // throws ConfigError

// Known algorithm names, in canonical order.
const std::vector<std::string>& algorithm_names();

struct SweepSpec {
  SweepAxis axis = SweepAxis::N;
  std::vector<double> values;
  int trials = 1;
  SystemConfig base_config;
  std::vector<std::string> algorithms;
  int random_draws = 1;
  int oracle_levels = 8;

  // Throws ConfigError.
  void validate() const;
};

struct ResultRow {
  std::string axis_name;
  double axis_value = 0.0;
  std::string algorithm;
  std::uint64_t seed = 0;
  double objective = 0.0;  // NaN when the solver failed
  double mean_rate = 0.0;  // objective / T_t
  int iterations = 0;
  double wallclock_s = 0.0;
  std::vector<std::string> flags;
  std::optional<Solution> solution;  // kept when requested
  SystemConfig config;               // instance the row was computed on
};

struct SummaryRow {
  double axis_value = 0.0;
  std::string algorithm;
  int count = 0;   // successful trials
  int failed = 0;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  double median_rate = 0.0;
};

struct SweepResult {
  std::string axis_name;
  std::vector<ResultRow> rows;      // sorted by axis value, algorithm, trial seed
  std::vector<SummaryRow> summary;  // sorted by axis value, algorithm
};

// Instance config for one sweep point: axis applied, seed = seed base + trial.
SystemConfig sweep_instance(const SweepSpec& spec, double axis_value, int trial);

// Runs one algorithm on one instance and fills a row; failures become flagged rows.
ResultRow run_algorithm(const std::string& algorithm, const SystemConfig& config, const ChannelSet& channels,
                        int random_draws, int oracle_levels, bool keep_solution);

// Trials run on `jobs` worker threads; output order does not depend on scheduling.
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1, bool keep_solutions = false);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

struct OutputOptions {
  bool timing = false;  // wallclock_s is written as 0 unless set, keeping reruns byte-identical
};

// Columns: axis_name, axis_value, algorithm, seed, objective, mean_rate, iterations, wallclock_s, flags.
std::string rows_to_csv(const std::vector<ResultRow>& rows, const OutputOptions& options = {});
std::string rows_to_json(const std::string& axis, const std::vector<ResultRow>& rows,
                         const std::vector<SummaryRow>& summary, const OutputOptions& options = {});
std::string summary_to_csv(const std::vector<SummaryRow>& summary, const std::string& axis);

// %.9g
std::string format_double(double value);

struct OracleCheckRow {
  std::uint64_t seed = 0;
  int J = 0;
  double oracle = 0.0;
  double dynamic = 0.0;
  double upper_bound = 0.0;
  bool dynamic_ok = false;  // dynamic >= (1 - 0.05) oracle
  bool bound_ok = false;    // oracle <= upper bound
};

// Tiny-instance certification: for each seed and each J in 1..config.J, compares the
// dynamic solver and the upper bound against the grid oracle.
std::vector<OracleCheckRow> oracle_check(const SystemConfig& config, int seeds, int phase_levels);

}  // namespace aircomp
