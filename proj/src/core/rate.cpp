#include "aircomp/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace aircomp {

TransceiverSetting uniform_forcing(std::span<const double> gains, double max_power) {
  if (gains.empty()) throw std::invalid_argument("uniform_forcing: no devices");
  if (!(max_power > 0.0)) throw std::invalid_argument("uniform_forcing: P0 must be positive");
  for (double g : gains) {
    if (!(g > 0.0)) throw std::invalid_argument("uniform_forcing: a zero channel gain cannot be forced");
  }
  TransceiverSetting s;
  const double weakest = *std::min_element(gains.begin(), gains.end());
  s.eta = max_power * weakest;
  s.powers.reserve(gains.size());
  for (double g : gains) s.powers.push_back(g == weakest ? max_power : std::min(max_power, s.eta / g));
  s.receive_scale = 1.0 / std::sqrt(s.eta);
  return s;
}

double effective_snr(double energy, double time, double min_gain, double noise) {
  if (!(noise > 0.0)) throw std::invalid_argument("effective_snr: noise must be positive");
  const double num = energy * min_gain;
  if (time <= 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return num / (time * noise);
}

double computation_rate(double snr, int quantization_bits, int rate_devices) {
  if (snr < 0.0 || std::isnan(snr)) throw std::invalid_argument("computation_rate: negative snr");
  if (quantization_bits < 1 || rate_devices < 2) throw std::invalid_argument("computation_rate: bad m~/K~");
  const double denom = quantization_bits + std::log2(static_cast<double>(rate_devices));
  return std::max(0.0, std::log2(snr)) / denom;
}

double volume_term(double time, double energy_gain, double noise, int quantization_bits, int rate_devices) {
  if (time <= 0.0) return 0.0;
  return time * computation_rate(energy_gain / (time * noise), quantization_bits, rate_devices);
}

std::vector<double> proportional_time_allocation(std::span<const double> c, double total_time) {
  if (c.empty()) return {};
  if (!(total_time > 0.0)) throw std::invalid_argument("proportional_time_allocation: T must be positive");
  double sum = 0.0;
  for (double v : c) {
    if (!(v > 0.0)) throw std::invalid_argument("proportional_time_allocation: every c must be positive");
    sum += v;
  }
  if (sum / total_time <= 1.0) {
    throw std::domain_error("operating point below rate-positivity threshold");
  }
  std::vector<double> t(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) t[i] = total_time * c[i] / sum;
  return t;
}

std::vector<double> optimal_time_allocation(std::span<const double> weights, std::span<const double> c,
                                            double total_time) {
  if (weights.size() != c.size()) throw std::invalid_argument("optimal_time_allocation: size mismatch");
  const std::size_t n = c.size();
  std::vector<double> t(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] > 0.0 && weights[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) return t;

  // Stationarity: t_l = c_l exp(-1 - nu / w_l) with nu >= 0 the multiplier of sum(t) <= T.
  auto times_at = [&](double nu) {
    double s = 0.0;
    for (std::size_t i : active) {
      t[i] = c[i] * std::exp(-1.0 - nu / weights[i]);
      s += t[i];
    }
    return s;
  };
  if (times_at(0.0) <= total_time) return t;

  const double w0 = weights[active.front()];
  const bool uniform = std::all_of(active.begin(), active.end(), [&](std::size_t i) { return weights[i] == w0; });
  if (uniform) {
    double sum = 0.0;
    for (std::size_t i : active) sum += c[i];
    for (std::size_t i : active) t[i] = total_time * c[i] / sum;
    return t;
  }

  double lo = 0.0;
  double hi = 1.0;
  while (times_at(hi) > total_time) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (times_at(mid) > total_time ? lo : hi) = mid;
  }
  const double s = times_at(hi);
  for (std::size_t i : active) t[i] *= total_time / s;
  return t;
}

Allocation Allocation::zeros(int clusters, int slots) {
  return Allocation{RMatrix::Zero(clusters, slots), RMatrix::Zero(clusters, slots)};
}

bool Diagnostics::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

RMatrix gain_table(const ChannelSet& channels, const std::vector<BeamPattern>& patterns) {
  const int L = channels.clusters();
  if (patterns.empty()) {
    RMatrix gains(L, 1);
    for (int l = 0; l < L; ++l) gains(l, 0) = min_direct_gain(channels, l).value;
    return gains;
  }
  RMatrix gains(L, static_cast<Eigen::Index>(patterns.size()));
  for (int l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < patterns.size(); ++j) {
      gains(l, static_cast<Eigen::Index>(j)) = min_gain(channels, l, patterns[j]).value;
    }
  }
  return gains;
}

Evaluation evaluate_solution(const SystemConfig& config, const ChannelSet& channels, const Solution& solution) {
  const int L = config.clusters;
  const int J = solution.slots();
  std::vector<std::string> violations;
  const Allocation& a = solution.allocation;
  if (a.times.rows() != L || a.times.cols() != J || a.energies.rows() != L || a.energies.cols() != J) {
    throw ConstraintViolation("allocation dimensions do not match L x J");
  }
  for (std::size_t j = 0; j < solution.patterns.size(); ++j) {
    const BeamPattern& p = solution.patterns[j];
    if (p.size() != config.irs_elements) {
      throw ConstraintViolation("pattern " + std::to_string(j) + " has the wrong length");
    }
    if (!p.is_unit_modulus(1e-9)) violations.push_back("pattern " + std::to_string(j) + " is not unit-modulus");
  }
  if ((a.times.array() < 0.0).any()) violations.push_back("negative time share");
  if ((a.energies.array() < 0.0).any()) violations.push_back("negative energy share");
  if (a.times.sum() > config.frame_time + 1e-9) {
    std::ostringstream os;
    os << "total time " << a.times.sum() << " exceeds T_t";
    violations.push_back(os.str());
  }
  for (int l = 0; l < L; ++l) {
    if (a.energies.row(l).sum() > config.energy_budget + 1e-12) {
      violations.push_back("cluster " + std::to_string(l) + " exceeds E_max");
    }
  }
  if (!violations.empty()) {
    std::string msg = "constraint violation:";
    for (const auto& v : violations) msg += " [" + v + "]";
    throw ConstraintViolation(msg);
  }

  const RMatrix gains = gain_table(channels, solution.patterns);
  Evaluation ev;
  ev.per_cluster_rates.assign(static_cast<std::size_t>(L), 0.0);
  for (int l = 0; l < L; ++l) {
    double volume = 0.0;
    for (int j = 0; j < J; ++j) {
      volume += volume_term(a.times(l, j), a.energies(l, j) * gains(l, j), config.noise(l),
                            config.quantization_bits, config.rate_devices);
    }
    ev.per_cluster_rates[static_cast<std::size_t>(l)] = volume / config.frame_time;
    ev.objective += config.weight(l) * volume;
  }
  return ev;
}

void finalize(const SystemConfig& config, const ChannelSet& channels, Solution& solution) {
  const Evaluation ev = evaluate_solution(config, channels, solution);
  solution.objective = ev.objective;
  solution.per_cluster_rates = ev.per_cluster_rates;
}

Solution allocate_single_slot(const SystemConfig& config, const ChannelSet& channels,
                              std::vector<BeamPattern> patterns, std::vector<int> assignment,
                              std::string algorithm) {
  const int L = config.clusters;
  Solution sol;
  sol.algorithm = std::move(algorithm);
  sol.patterns = std::move(patterns);
  const int J = sol.slots();
  const RMatrix gains = gain_table(channels, sol.patterns);
  if (assignment.empty()) {
    assignment.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      Eigen::Index best = 0;
      gains.row(l).maxCoeff(&best);  // first maximal index
      assignment[static_cast<std::size_t>(l)] = static_cast<int>(best);
    }
  }
  if (static_cast<int>(assignment.size()) != L) throw std::invalid_argument("assignment size mismatch");

  std::vector<double> c(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const int j = assignment[static_cast<std::size_t>(l)];
    if (j < 0 || j >= J) throw std::invalid_argument("assignment index out of range");
    c[static_cast<std::size_t>(l)] = config.energy_budget * gains(l, j) / config.noise(l);
  }
  const std::vector<double> t = optimal_time_allocation(config.weights, c, config.frame_time);

  sol.allocation = Allocation::zeros(L, J);
  sol.association.assign(static_cast<std::size_t>(L), -1);
  sol.split.assign(static_cast<std::size_t>(L), false);
  for (int l = 0; l < L; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    if (t[ul] <= 0.0) continue;
    const int j = assignment[ul];
    sol.allocation.times(l, j) = t[ul];
    sol.allocation.energies(l, j) = config.energy_budget;
    sol.association[ul] = j;
  }
  finalize(config, channels, sol);
  return sol;
}

}  // namespace aircomp
