#include "aircomp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace aircomp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Restricted growth strings: labels[i] <= 1 + max(labels[0..i-1]), at most k blocks.
template <typename Visit>
void for_each_partition(int n, int k, Visit&& visit) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self, int i, int blocks) -> void {
    if (i == n) {
      visit(labels, blocks);
      return;
    }
    const int limit = std::min(blocks, k - 1);
    for (int b = 0; b <= limit; ++b) {
      labels[static_cast<std::size_t>(i)] = b;
      self(self, i + 1, std::max(blocks, b + 1));
    }
  };
  if (n == 0) return;
  labels[0] = 0;
  rec(rec, 1, 1);
}

BeamPattern grid_pattern(std::uint64_t index, int N, int Q) {
  RVector phases(N);
  for (int n = 0; n < N; ++n) {
    phases[n] = 2.0 * std::numbers::pi * static_cast<double>(index % static_cast<std::uint64_t>(Q)) / Q;
    index /= static_cast<std::uint64_t>(Q);
  }
  return BeamPattern::from_phases(phases);
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return nlohmann::json::parse(format_double(v));
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::uint64_t partition_count(int n, int k) {
  // Stirling numbers of the second kind, summed over 1..k blocks.
  if (n == 0) return 1;
  std::vector<std::vector<std::uint64_t>> S(static_cast<std::size_t>(n) + 1,
                                            std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
  S[0][0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      S[ui][uj] = static_cast<std::uint64_t>(j) * S[ui - 1][uj] + S[ui - 1][uj - 1];
    }
  }
  std::uint64_t total = 0;
  for (int j = 1; j <= std::min(n, k); ++j) total += S[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
  return total;
}

Solution oracle_grid_search(const SystemConfig& config, const ChannelSet& channels, int J, int phase_levels) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  const int L = config.clusters;
  const int N = config.irs_elements;
  if (J < 1 || J > L) throw ConfigError("J must satisfy 1 <= J <= L");
  if (phase_levels < 1) throw ConfigError("oracle phase levels must be positive");
  for (int l = 1; l < L; ++l) {
    if (config.weight(l) != config.weight(0)) throw ConfigError("oracle_grid_search requires equal cluster weights");
  }
  double patterns_d = std::pow(static_cast<double>(phase_levels), N);
  const double work = patterns_d * static_cast<double>(partition_count(L, J));
  if (work > 1e7) {
    throw ConfigError("oracle grid too large (Q^N x partitions = " + format_double(work) +
                      " > 1e7); reduce N or the number of phase levels");
  }
  const auto P = static_cast<std::uint64_t>(patterns_d);

  // value(l, p) = E gamma_l(p) / sigma_l^2
  RMatrix value(L, static_cast<Eigen::Index>(P));
  for (std::uint64_t p = 0; p < P; ++p) {
    const BeamPattern pattern = grid_pattern(p, N, phase_levels);
    for (int l = 0; l < L; ++l) {
      value(l, static_cast<Eigen::Index>(p)) =
          config.energy_budget * min_gain(channels, l, pattern).value / config.noise(l);
    }
  }

  double best_total = -1.0;
  std::vector<int> best_labels;
  std::vector<std::uint64_t> best_patterns;
  for_each_partition(L, J, [&](const std::vector<int>& labels, int blocks) {
    double total = 0.0;
    std::vector<std::uint64_t> chosen(static_cast<std::size_t>(blocks), 0);
    for (int b = 0; b < blocks; ++b) {
      double best = -1.0;
      for (std::uint64_t p = 0; p < P; ++p) {
        double s = 0.0;
        for (int l = 0; l < L; ++l) {
          if (labels[static_cast<std::size_t>(l)] == b) s += value(l, static_cast<Eigen::Index>(p));
        }
        if (s > best) {
          best = s;
          chosen[static_cast<std::size_t>(b)] = p;
        }
      }
      total += best;
    }
    if (total > best_total) {
      best_total = total;
      best_labels = labels;
      best_patterns = chosen;
    }
  });

  std::vector<BeamPattern> patterns;
  for (std::uint64_t p : best_patterns) patterns.push_back(grid_pattern(p, N, phase_levels));
  while (static_cast<int>(patterns.size()) < J) patterns.push_back(patterns.front());
  Solution sol = allocate_single_slot(config, channels, std::move(patterns), best_labels, "oracle");
  sol.diagnostics.iterations = static_cast<int>(std::min<double>(work, 1e9));
  sol.diagnostics.wallclock_s = seconds_since(start);
  return sol;
}

Solution baseline_random(const SystemConfig& config, const ChannelSet& channels, int J, int draws) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  if (J < 1 || J > config.clusters) throw ConfigError("J must satisfy 1 <= J <= L");
  if (draws < 1) throw ConfigError("random baseline needs at least one draw");
  // Separate stream from channel synthesis so the patterns do not correlate with fading.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::optional<Solution> best;
  for (int d = 0; d < draws; ++d) {
    std::vector<BeamPattern> patterns;
    for (int j = 0; j < J; ++j) {
      RVector ph(config.irs_elements);
      for (int n = 0; n < config.irs_elements; ++n) ph[n] = phase(rng);
      patterns.push_back(BeamPattern::from_phases(ph));
    }
    Solution s = allocate_single_slot(config, channels, std::move(patterns), {}, "random_bf");
    if (!best || s.objective > best->objective) best = std::move(s);
  }
  best->diagnostics.iterations = draws;
  best->diagnostics.wallclock_s = seconds_since(start);
  return *best;
}

Solution baseline_no_irs(const SystemConfig& config, const ChannelSet& channels) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  Solution s = allocate_single_slot(config, channels, {}, {}, "no_irs");
  s.diagnostics.wallclock_s = seconds_since(start);
  return s;
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::N: return "N";
    case SweepAxis::J: return "J";
    case SweepAxis::E_max: return "E_max";
    case SweepAxis::seeds: return "seeds";
  }
  return "N";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "N") return SweepAxis::N;
  if (name == "J") return SweepAxis::J;
  if (name == "E_max") return SweepAxis::E_max;
  if (name == "seeds") return SweepAxis::seeds;
  throw ConfigError("unknown sweep axis '" + name + "' (expected N, J, E_max or seeds)");
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"upper_bound", "cluster_adaptive", "dynamic", "low_complexity",
                                              "random_bf",   "no_irs",           "oracle"};
  return names;
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep values must be nonempty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (algorithms.empty()) throw ConfigError("sweep needs at least one algorithm");
  for (const auto& a : algorithms) {
    const auto& known = algorithm_names();
    if (std::find(known.begin(), known.end(), a) == known.end()) throw ConfigError("unknown algorithm '" + a + "'");
  }
  if (random_draws < 1) throw ConfigError("random_draws must be at least 1");
  if (oracle_levels < 1) throw ConfigError("oracle_levels must be at least 1");
  for (double v : values) {
    if (axis != SweepAxis::E_max && v != std::floor(v)) throw ConfigError("sweep values must be integers for this axis");
    if (axis == SweepAxis::seeds && v < 0) throw ConfigError("seed values must be nonnegative");
  }
  base_config.validate();
  for (double v : values) sweep_instance(*this, v, 0).validate();
}

SystemConfig sweep_instance(const SweepSpec& spec, double axis_value, int trial) {
  SystemConfig c = spec.base_config;
  std::uint64_t seed_base = c.seed;
  switch (spec.axis) {
    case SweepAxis::N: c.irs_elements = static_cast<int>(axis_value); break;
    case SweepAxis::J: c.pattern_budget = static_cast<int>(axis_value); break;
    case SweepAxis::E_max: c.energy_budget = axis_value; break;
    case SweepAxis::seeds: seed_base = static_cast<std::uint64_t>(axis_value); break;
  }
  c.seed = seed_base + static_cast<std::uint64_t>(trial);
  return c;
}

ResultRow run_algorithm(const std::string& algorithm, const SystemConfig& config, const ChannelSet& channels,
                        int random_draws, int oracle_levels, bool keep_solution) {
  ResultRow row;
  row.algorithm = algorithm;
  row.seed = config.seed;
  row.config = config;
  const int J = config.pattern_budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    std::optional<Solution> sol;
    if (algorithm == "upper_bound") {
      const UpperBound ub = solve_upper_bound(config, channels);
      row.objective = ub.value;
      row.iterations = ub.newton_steps;
    } else if (algorithm == "cluster_adaptive") {
      sol = solve_cluster_adaptive(config, channels);
    } else if (algorithm == "dynamic") {
      sol = solve_dynamic(config, channels, J);
    } else if (algorithm == "low_complexity") {
      sol = solve_low_complexity(config, channels, J);
    } else if (algorithm == "random_bf") {
      sol = baseline_random(config, channels, J, random_draws);
    } else if (algorithm == "no_irs") {
      sol = baseline_no_irs(config, channels);
    } else if (algorithm == "oracle") {
      sol = oracle_grid_search(config, channels, J, oracle_levels);
    } else {
      throw ConfigError("unknown algorithm '" + algorithm + "'");
    }
    if (sol) {
      row.objective = sol->objective;
      row.iterations = sol->diagnostics.iterations;
      row.flags = sol->diagnostics.flags;
      if (keep_solution) row.solution = std::move(sol);
    }
  } catch (const ConfigError& e) {
    row.objective = std::numeric_limits<double>::quiet_NaN();
    row.flags.push_back(std::string("config_error: ") + e.what());
  } catch (const std::exception& e) {
    row.objective = std::numeric_limits<double>::quiet_NaN();
    row.flags.push_back(std::string("solver_failure: ") + e.what());
  }
  row.mean_rate = row.objective / config.frame_time;
  row.wallclock_s = seconds_since(start);
  return row;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<double, std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.axis_value, r.algorithm}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.axis_value = key.first;
    s.algorithm = key.second;
    std::vector<double> rates;
    for (const ResultRow* r : members) {
      if (std::isfinite(r->mean_rate)) {
        rates.push_back(r->mean_rate);
      } else {
        ++s.failed;
      }
    }
    s.count = static_cast<int>(rates.size());
    if (!rates.empty()) {
      double sum = 0.0;
      for (double v : rates) sum += v;
      s.mean_rate = sum / s.count;
      double ss = 0.0;
      for (double v : rates) ss += (v - s.mean_rate) * (v - s.mean_rate);
      s.stderr_rate = s.count > 1 ? std::sqrt(ss / (s.count - 1) / s.count) : 0.0;
      std::sort(rates.begin(), rates.end());
      const std::size_t m = rates.size() / 2;
      s.median_rate = rates.size() % 2 ? rates[m] : 0.5 * (rates[m - 1] + rates[m]);
    } else {
      s.mean_rate = s.stderr_rate = s.median_rate = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(s));
  }
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, int jobs, bool keep_solutions) {
  spec.validate();
  struct Task {
    double value;
    int trial;
  };
  std::vector<Task> tasks;
  for (double v : spec.values) {
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({v, t});
  }
  std::vector<std::vector<ResultRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  const std::string name = axis_name(spec.axis);
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const SystemConfig c = sweep_instance(spec, tasks[i].value, tasks[i].trial);
      std::vector<ResultRow> rows;
      try {
        const ChannelSet channels = synthesize_channels(c);
        for (const auto& a : spec.algorithms) {
          rows.push_back(run_algorithm(a, c, channels, spec.random_draws, spec.oracle_levels, keep_solutions));
        }
      } catch (const std::exception& e) {
        for (const auto& a : spec.algorithms) {
          ResultRow r;
          r.algorithm = a;
          r.seed = c.seed;
          r.config = c;
          r.objective = r.mean_rate = std::numeric_limits<double>::quiet_NaN();
          r.flags.push_back(std::string("channel_failure: ") + e.what());
          rows.push_back(std::move(r));
        }
      }
      for (auto& r : rows) {
        r.axis_name = name;
        r.axis_value = tasks[i].value;
      }
      results[i] = std::move(rows);
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  out.axis_name = name;
  for (auto& rs : results) {
    for (auto& r : rs) out.rows.push_back(std::move(r));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    return a.seed < b.seed;
  });
  out.summary = summarize(out.rows);
  return out;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows, const OutputOptions& options) {
  std::ostringstream os;
  os << "axis_name,axis_value,algorithm,seed,objective,mean_rate,iterations,wallclock_s,flags\n";
  for (const auto& r : rows) {
    os << csv_field(r.axis_name) << ',' << format_double(r.axis_value) << ',' << r.algorithm << ',' << r.seed << ','
       << format_double(r.objective) << ',' << format_double(r.mean_rate) << ',' << r.iterations << ','
       << format_double(options.timing ? r.wallclock_s : 0.0) << ',' << csv_field(join_flags(r.flags)) << '\n';
  }
  return os.str();
}

std::string summary_to_csv(const std::vector<SummaryRow>& summary, const std::string& axis) {
  std::ostringstream os;
  os << "axis_name,axis_value,algorithm,trials,failed,mean_rate,stderr_rate,median_rate\n";
  for (const auto& s : summary) {
    os << csv_field(axis) << ',' << format_double(s.axis_value) << ',' << s.algorithm << ',' << s.count << ','
       << s.failed << ',' << format_double(s.mean_rate) << ',' << format_double(s.stderr_rate) << ','
       << format_double(s.median_rate) << '\n';
  }
  return os.str();
}

std::string rows_to_json(const std::string& axis, const std::vector<ResultRow>& rows,
                         const std::vector<SummaryRow>& summary, const OutputOptions& options) {
  nlohmann::ordered_json doc;
  doc["axis_name"] = axis;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["axis_name"] = r.axis_name;
    j["axis_value"] = json_number(r.axis_value);
    j["algorithm"] = r.algorithm;
    j["seed"] = r.seed;
    j["objective"] = json_number(r.objective);
    j["mean_rate"] = json_number(r.mean_rate);
    j["iterations"] = r.iterations;
    j["wallclock_s"] = json_number(options.timing ? r.wallclock_s : 0.0);
    j["flags"] = r.flags;
    doc["rows"].push_back(std::move(j));
  }
  doc["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : summary) {
    nlohmann::ordered_json j;
    j["axis_value"] = json_number(s.axis_value);
    j["algorithm"] = s.algorithm;
    j["trials"] = s.count;
    j["failed"] = s.failed;
    j["mean_rate"] = json_number(s.mean_rate);
    j["stderr_rate"] = json_number(s.stderr_rate);
    j["median_rate"] = json_number(s.median_rate);
    doc["summary"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<OracleCheckRow> oracle_check(const SystemConfig& config, int seeds, int phase_levels) {
  config.validate();
  if (seeds < 1) throw ConfigError("oracle check needs at least one seed");
  std::vector<OracleCheckRow> out;
  for (int s = 0; s < seeds; ++s) {
    SystemConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(s);
    const ChannelSet channels = synthesize_channels(c);
    const double ub = solve_upper_bound(c, channels).value;
    for (int J = 1; J <= config.pattern_budget; ++J) {
      c.pattern_budget = J;
      OracleCheckRow row;
      row.seed = c.seed;
      row.J = J;
      row.oracle = oracle_grid_search(c, channels, J, phase_levels).objective;
      row.dynamic = solve_dynamic(c, channels, J).objective;
      row.upper_bound = ub;
      row.dynamic_ok = row.dynamic >= 0.95 * row.oracle;
      row.bound_ok = row.oracle <= ub * (1.0 + 1e-9);
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace aircomp
