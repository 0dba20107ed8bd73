#pragma once

#include <string>

#include "aircomp/bench.hpp"

// JSON documents. Scenario keys mirror the SystemConfig field names:
//   L, K_per_cluster, N, J, T_t, E_max, noise_power | noise_power_dbm, m_tilde,
//   K_tilde, weights, pathloss_ref_db, alpha_direct, alpha_irs, seed,
//   geometry { access_point, irs, cluster_centers, radius }
// Per-cluster lists accept a scalar or a single entry, which is broadcast to L.
// Missing keys keep their defaults; unknown keys are rejected.
namespace aircomp {

// All functions throw ConfigError on malformed input.
SystemConfig parse_config(const std::string& json_text);
SystemConfig load_config(const std::string& path);
std::string config_to_json(const SystemConfig& config);

// { axis, values, trials, algorithms, random_draws, oracle_levels, base_config }
SweepSpec parse_sweep(const std::string& json_text);
SweepSpec load_sweep(const std::string& path);

// Self-contained record: scenario (seed included), patterns as phases, allocation,
// association, per-cluster rates, objective and diagnostics.
std::string solution_to_json(const SystemConfig& config, const Solution& solution);

struct SavedSolution {
  SystemConfig config;
  Solution solution;
};
SavedSolution parse_solution(const std::string& json_text);

std::string read_text_file(const std::string& path);   // throws ConfigError
void write_text_file(const std::string& path, const std::string& text);  // throws std::runtime_error

}  // namespace aircomp
