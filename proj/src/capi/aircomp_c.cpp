#include "aircomp/aircomp.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "aircomp/io.hpp"
#include "aircomp/selftest.hpp"

struct aircomp_config {
  aircomp::SystemConfig value;
};

struct aircomp_solution {
  aircomp::SystemConfig config;
  aircomp::Solution value;
};

struct aircomp_sweep {
  aircomp::SweepSpec value;
};

struct aircomp_sweep_result {
  aircomp::SweepResult value;
};

namespace {

thread_local std::string last_error;

aircomp_status fail(aircomp_status code, const std::string& message) {
  last_error = message;
  return code;
}

// Maps exceptions from the core onto status codes.
template <typename F>
aircomp_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const aircomp::ConfigError& e) {
    return fail(AIRCOMP_ERR_CONFIG, e.what());
  } catch (const aircomp::SolverError& e) {
    return fail(AIRCOMP_ERR_SOLVER, e.what());
  } catch (const aircomp::ConstraintViolation& e) {
    return fail(AIRCOMP_ERR_SOLVER, e.what());
  } catch (const std::domain_error& e) {
    return fail(AIRCOMP_ERR_SOLVER, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(AIRCOMP_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(AIRCOMP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AIRCOMP_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

aircomp_status null_argument(const char* what) { return fail(AIRCOMP_ERR_ARGUMENT, std::string(what) + " is null"); }

aircomp::Solution solve(const aircomp::SystemConfig& config, const std::string& algorithm) {
  const aircomp::ChannelSet channels = aircomp::synthesize_channels(config);
  const int J = config.pattern_budget;
  if (algorithm == "upper_bound") {
    const aircomp::UpperBound ub = aircomp::solve_upper_bound(config, channels);
    aircomp::Solution s;
    s.algorithm = algorithm;
    s.objective = ub.value;
    s.diagnostics.iterations = ub.newton_steps;
    s.diagnostics.wallclock_s = ub.wallclock_s;
    s.allocation = aircomp::Allocation::zeros(config.clusters, 1);
    for (int l = 0; l < config.clusters; ++l) s.allocation.times(l, 0) = ub.times[static_cast<std::size_t>(l)];
    return s;
  }
  if (algorithm == "cluster_adaptive") return aircomp::solve_cluster_adaptive(config, channels);
  if (algorithm == "dynamic") return aircomp::solve_dynamic(config, channels, J);
  if (algorithm == "low_complexity") return aircomp::solve_low_complexity(config, channels, J);
  if (algorithm == "random_bf") return aircomp::baseline_random(config, channels, J);
  if (algorithm == "no_irs") return aircomp::baseline_no_irs(config, channels);
  if (algorithm == "oracle") return aircomp::oracle_grid_search(config, channels, J, 8);
  throw aircomp::ConfigError("unknown algorithm '" + algorithm + "'");
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

extern "C" {

const char* aircomp_last_error(void) { return last_error.c_str(); }

const char* aircomp_version(void) { return "1.0.0"; }

void aircomp_string_free(char* s) { std::free(s); }

aircomp_status aircomp_config_default(aircomp_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_config{};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_config_parse(const char* json, aircomp_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_config{aircomp::parse_config(json)};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_config_load(const char* path, aircomp_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_config{aircomp::load_config(path)};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_config_set_seed(aircomp_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  config->value.seed = seed;
  return AIRCOMP_OK;
}

aircomp_status aircomp_config_get_seed(const aircomp_config* config, uint64_t* seed) {
  if (!config) return null_argument("config");
  if (!seed) return null_argument("seed");
  *seed = config->value.seed;
  return AIRCOMP_OK;
}

aircomp_status aircomp_config_to_json(const aircomp_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = dup_string(aircomp::config_to_json(config->value));
    return AIRCOMP_OK;
  });
}

void aircomp_config_free(aircomp_config* config) { delete config; }

aircomp_status aircomp_solve(const aircomp_config* config, const char* algorithm, aircomp_solution** out) {
  if (!config) return null_argument("config");
  if (!algorithm) return null_argument("algorithm");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_solution{config->value, solve(config->value, algorithm)};
    return AIRCOMP_OK;
  });
}

double aircomp_solution_objective(const aircomp_solution* s) { return s ? s->value.objective : std::nan(""); }

double aircomp_solution_mean_rate(const aircomp_solution* s) {
  return s ? s->value.objective / s->config.frame_time : std::nan("");
}

int aircomp_solution_iterations(const aircomp_solution* s) { return s ? s->value.diagnostics.iterations : 0; }

double aircomp_solution_wallclock(const aircomp_solution* s) { return s ? s->value.diagnostics.wallclock_s : std::nan(""); }

aircomp_status aircomp_solution_to_json(const aircomp_solution* s, char** out) {
  if (!s) return null_argument("solution");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = dup_string(aircomp::solution_to_json(s->config, s->value));
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_solution_verify_json(const char* json, double* stored, double* recomputed) {
  if (!json) return null_argument("json");
  return guarded([&] {
    const aircomp::SavedSolution saved = aircomp::parse_solution(json);
    const aircomp::ChannelSet channels = aircomp::synthesize_channels(saved.config);
    const aircomp::Evaluation ev = aircomp::evaluate_solution(saved.config, channels, saved.solution);
    if (stored) *stored = saved.solution.objective;
    if (recomputed) *recomputed = ev.objective;
    return AIRCOMP_OK;
  });
}

void aircomp_solution_free(aircomp_solution* s) { delete s; }

aircomp_status aircomp_simulate(const aircomp_config* config, const char* algorithms, int keep_solutions,
                                aircomp_sweep_result** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::vector<std::string> names;
    const auto& known = aircomp::algorithm_names();
    if (algorithms) {
      names = split_list(algorithms);
    } else {
      for (const auto& a : known) {
        if (a != "oracle") names.push_back(a);
      }
    }
    if (names.empty()) throw aircomp::ConfigError("no algorithm selected");
    for (const auto& a : names) {
      if (std::find(known.begin(), known.end(), a) == known.end()) {
        throw aircomp::ConfigError("unknown algorithm '" + a + "'");
      }
    }
    const aircomp::SystemConfig& c = config->value;
    c.validate();
    const aircomp::ChannelSet channels = aircomp::synthesize_channels(c);
    aircomp::SweepResult result;
    result.axis_name = "instance";
    for (const auto& a : names) {
      aircomp::ResultRow row = aircomp::run_algorithm(a, c, channels, 1, 8, keep_solutions != 0);
      row.axis_name = result.axis_name;
      row.axis_value = static_cast<double>(c.seed);
      result.rows.push_back(std::move(row));
    }
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const auto& x, const auto& y) { return x.algorithm < y.algorithm; });
    result.summary = aircomp::summarize(result.rows);
    *out = new aircomp_sweep_result{std::move(result)};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_sweep_parse(const char* json, aircomp_sweep** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_sweep{aircomp::parse_sweep(json)};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_sweep_load(const char* path, aircomp_sweep** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new aircomp_sweep{aircomp::load_sweep(path)};
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_sweep_set_seed(aircomp_sweep* spec, uint64_t seed) {
  if (!spec) return null_argument("spec");
  spec->value.base_config.seed = seed;
  return AIRCOMP_OK;
}

void aircomp_sweep_free(aircomp_sweep* spec) { delete spec; }

aircomp_status aircomp_sweep_run(const aircomp_sweep* spec, int jobs, int keep_solutions,
                                 aircomp_sweep_result** out) {
  if (!spec) return null_argument("spec");
  if (!out) return null_argument("out");
  if (jobs < 1) return fail(AIRCOMP_ERR_ARGUMENT, "jobs must be at least 1");
  return guarded([&] {
    *out = new aircomp_sweep_result{aircomp::run_sweep(spec->value, jobs, keep_solutions != 0)};
    return AIRCOMP_OK;
  });
}

size_t aircomp_sweep_result_rows(const aircomp_sweep_result* r) { return r ? r->value.rows.size() : 0; }

size_t aircomp_sweep_result_failures(const aircomp_sweep_result* r) {
  if (!r) return 0;
  size_t n = 0;
  for (const auto& row : r->value.rows) n += std::isfinite(row.objective) ? 0 : 1;
  return n;
}

aircomp_status aircomp_sweep_result_status(const aircomp_sweep_result* r) {
  if (!r) return null_argument("result");
  aircomp_status status = AIRCOMP_OK;
  for (const auto& row : r->value.rows) {
    if (std::isfinite(row.objective)) continue;
    for (const auto& f : row.flags) {
      if (f.rfind("config_error", 0) == 0) return AIRCOMP_ERR_CONFIG;
    }
    status = AIRCOMP_ERR_SOLVER;
  }
  return status;
}

aircomp_status aircomp_sweep_result_table(const aircomp_sweep_result* r, aircomp_format format, int timing,
                                          char** out) {
  if (!r) return null_argument("result");
  if (!out) return null_argument("out");
  return guarded([&] {
    aircomp::OutputOptions opt;
    opt.timing = timing != 0;
    *out = dup_string(format == AIRCOMP_FORMAT_JSON
                          ? aircomp::rows_to_json(r->value.axis_name, r->value.rows, r->value.summary, opt)
                          : aircomp::rows_to_csv(r->value.rows, opt));
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_sweep_result_summary(const aircomp_sweep_result* r, char** out) {
  if (!r) return null_argument("result");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = dup_string(aircomp::summary_to_csv(r->value.summary, r->value.axis_name));
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_sweep_result_save_solutions(const aircomp_sweep_result* r, const char* dir) {
  if (!r) return null_argument("result");
  if (!dir) return null_argument("dir");
  return guarded([&] {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) return fail(AIRCOMP_ERR_IO, std::string("not a directory: ") + dir);
    for (const auto& row : r->value.rows) {
      if (!row.solution) continue;
      const std::string name = row.axis_name + "_" + aircomp::format_double(row.axis_value) + "_" + row.algorithm +
                               "_" + std::to_string(row.seed) + ".json";
      try {
        aircomp::write_text_file((fs::path(dir) / name).string(), aircomp::solution_to_json(row.config, *row.solution));
      } catch (const std::runtime_error& e) {
        return fail(AIRCOMP_ERR_IO, e.what());
      }
    }
    return AIRCOMP_OK;
  });
}

void aircomp_sweep_result_free(aircomp_sweep_result* r) { delete r; }

aircomp_status aircomp_oracle_check(const aircomp_config* config, int seeds, int phase_levels, char** report,
                                    int* passed) {
  if (!config) return null_argument("config");
  if (!report) return null_argument("report");
  if (!passed) return null_argument("passed");
  return guarded([&] {
    const auto rows = aircomp::oracle_check(config->value, seeds, phase_levels);
    std::ostringstream os;
    os << "seed,J,oracle,dynamic,upper_bound,dynamic_within_5pct,oracle_below_bound\n";
    bool ok = true;
    for (const auto& r : rows) {
      os << r.seed << ',' << r.J << ',' << aircomp::format_double(r.oracle) << ','
         << aircomp::format_double(r.dynamic) << ',' << aircomp::format_double(r.upper_bound) << ','
         << (r.dynamic_ok ? "pass" : "FAIL") << ',' << (r.bound_ok ? "pass" : "FAIL") << '\n';
      ok = ok && r.dynamic_ok && r.bound_ok;
    }
    *report = dup_string(os.str());
    *passed = ok ? 1 : 0;
    return AIRCOMP_OK;
  });
}

aircomp_status aircomp_selftest(char** report, int* passed) {
  if (!report) return null_argument("report");
  if (!passed) return null_argument("passed");
  return guarded([&] {
    const auto checks = aircomp::run_selftest();
    std::ostringstream os;
    bool ok = true;
    for (const auto& c : checks) {
      os << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) os << ": " << c.detail;
      os << '\n';
      ok = ok && c.passed;
    }
    *report = dup_string(os.str());
    *passed = ok ? 1 : 0;
    return AIRCOMP_OK;
  });
}

}  // extern "C"
