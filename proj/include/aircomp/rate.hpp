#pragma once

#include <span>
#include <string>
#include <vector>

#include "aircomp/model.hpp"

namespace aircomp {

// Uniform-forcing transceiver for one cluster and one slot.
struct TransceiverSetting {
  double eta = 0.0;             // common received amplitude^2 (denoising factor)
  std::vector<double> powers;   // p_k = |b_k|^2
  double receive_scale = 0.0;   // a = 1/sqrt(eta)
};

// eta = P0 * min(gains), p_k = eta / gain_k. Throws std::invalid_argument on a zero gain.
TransceiverSetting uniform_forcing(std::span<const double> gains, double max_power);

// energy * min_gain / (time * noise); +inf when time == 0 and the numerator is positive.
double effective_snr(double energy, double time, double min_gain, double noise);

// log2+(snr) / (m~ + log2 K~) in computed function values per channel use.
double computation_rate(double snr, int quantization_bits, int rate_devices);

// t * computation_rate(S / (t * noise)), extended by 0 at t = 0.
double volume_term(double time, double energy_gain, double noise, int quantization_bits, int rate_devices);

// t_l = T c_l / sum(c). Requires every c_l > 0 and sum(c)/T > 1.
std::vector<double> proportional_time_allocation(std::span<const double> c, double total_time);

// Maximizes sum_l w_l t_l log(c_l / t_l) subject to t >= 0, sum(t) <= T. Entries with
// c_l == 0 or w_l == 0 receive no time. Reduces to the proportional rule for equal
// weights whenever sum(c)/T >= e.
std::vector<double> optimal_time_allocation(std::span<const double> weights, std::span<const double> c,
                                            double total_time);

struct Allocation {
  RMatrix times;     // L x J [s]
  RMatrix energies;  // L x J [J]

  static Allocation zeros(int clusters, int slots);
};

struct Diagnostics {
  int iterations = 0;
  int outer_iterations = 0;
  double penalty_residual = 0.0;
  double wallclock_s = 0.0;
  double split_fraction = 0.0;      // clusters whose pre-polish time was split across slots
  double relaxed_objective = 0.0;   // lifted/relaxed iterate before extraction or projection
  std::vector<double> objective_trace;  // accepted (surrogate/penalized) objective values
  std::vector<int> trace_round;         // outer round of each trace entry
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

struct Solution {
  std::string algorithm;
  std::vector<BeamPattern> patterns;  // empty means IRS switched off (single direct-link slot)
  Allocation allocation;
  std::vector<int> association;       // cluster -> pattern index, -1 when inactive
  std::vector<bool> split;
  std::vector<double> per_cluster_rates;  // sum_j t r / T_t  [num/Hz]
  double objective = 0.0;                 // sum_l sum_j w_l t r  [num s/Hz]
  Diagnostics diagnostics;

  int slots() const { return patterns.empty() ? 1 : static_cast<int>(patterns.size()); }
};

struct Evaluation {
  double objective = 0.0;
  std::vector<double> per_cluster_rates;
};

// Recomputes everything from (patterns, allocation, channels). Throws ConstraintViolation
// listing every violated constraint.
Evaluation evaluate_solution(const SystemConfig& config, const ChannelSet& channels, const Solution& solution);

// gains(l, j) = min-gain of cluster l under pattern j; direct links only when `patterns` is empty.
RMatrix gain_table(const ChannelSet& channels, const std::vector<BeamPattern>& patterns);

// Serves each cluster in a single slot with the full energy budget and optimal times.
// An empty `assignment` picks, per cluster, the slot with the largest gain (lowest index on ties).
Solution allocate_single_slot(const SystemConfig& config, const ChannelSet& channels,
                              std::vector<BeamPattern> patterns, std::vector<int> assignment,
                              std::string algorithm);

// Refreshes objective and per-cluster rates from evaluate_solution.
void finalize(const SystemConfig& config, const ChannelSet& channels, Solution& solution);

}  // namespace aircomp
