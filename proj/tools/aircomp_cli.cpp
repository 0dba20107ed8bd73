// Command-line front end. Talks to the simulator only through the C interface.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aircomp/aircomp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// Tiny two-cluster instance used by oracle-check when no config is given.
constexpr const char* kOracleDefault = R"({"L": 2, "K_per_cluster": 1, "N": 2, "J": 2})";

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  bool save_solutions = false;
  int jobs = 1;
  bool timing = false;
  std::string algorithms;
  int seeds = 50;
  int levels = 8;
};

int exit_code(aircomp_status s) {
  switch (s) {
    case AIRCOMP_OK: return kExitOk;
    case AIRCOMP_ERR_CONFIG:
    case AIRCOMP_ERR_ARGUMENT:
    case AIRCOMP_ERR_IO: return kExitConfig;
    default: return kExitSolver;
  }
}

int report(aircomp_status s) {
  std::cerr << "error: " << aircomp_last_error() << '\n';
  return exit_code(s);
}

// Owns a string handed out by the library.
struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { aircomp_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

bool write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "error: cannot write " << path << '\n';
    return false;
  }
  return true;
}

aircomp_format format_of(const Options& o) { return o.format == "json" ? AIRCOMP_FORMAT_JSON : AIRCOMP_FORMAT_CSV; }

std::string solutions_dir(const Options& o) { return (o.out.empty() ? std::string("solutions") : o.out + ".solutions"); }

// Writes table, summary and saved solutions of a finished run.
int emit(const aircomp_sweep_result* result, const Options& o, bool with_summary) {
  OwnedString table;
  if (aircomp_status s = aircomp_sweep_result_table(result, format_of(o), o.timing ? 1 : 0, &table.p)) return report(s);
  if (!write_output(o.out, table.str())) return kExitConfig;
  if (with_summary) {
    OwnedString summary;
    if (aircomp_status s = aircomp_sweep_result_summary(result, &summary.p)) return report(s);
    if (o.out.empty()) {
      std::cerr << summary.str();
    } else if (!write_output(o.out + ".summary.csv", summary.str())) {
      return kExitConfig;
    }
  }
  if (o.save_solutions) {
    const std::string dir = solutions_dir(o);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      std::cerr << "error: cannot create " << dir << ": " << ec.message() << '\n';
      return kExitConfig;
    }
    if (aircomp_status s = aircomp_sweep_result_save_solutions(result, dir.c_str())) return report(s);
  }
  return kExitOk;
}

int run_simulate(const Options& o) {
  aircomp_config* config = nullptr;
  aircomp_status s = o.config.empty() ? aircomp_config_default(&config) : aircomp_config_load(o.config.c_str(), &config);
  if (s) return report(s);
  if (o.seed) aircomp_config_set_seed(config, *o.seed);
  aircomp_sweep_result* result = nullptr;
  s = aircomp_simulate(config, o.algorithms.empty() ? nullptr : o.algorithms.c_str(), o.save_solutions ? 1 : 0,
                       &result);
  aircomp_config_free(config);
  if (s) return report(s);
  int code = emit(result, o, false);
  if (code == kExitOk) {
    const aircomp_status rs = aircomp_sweep_result_status(result);
    if (rs != AIRCOMP_OK) {
      std::cerr << "error: " << aircomp_sweep_result_failures(result) << " algorithm(s) failed; see the flags column\n";
      code = exit_code(rs);
    }
  }
  aircomp_sweep_result_free(result);
  return code;
}

int run_sweep(const Options& o) {
  aircomp_sweep* spec = nullptr;
  if (aircomp_status s = aircomp_sweep_load(o.config.c_str(), &spec)) return report(s);
  if (o.seed) aircomp_sweep_set_seed(spec, *o.seed);
  aircomp_sweep_result* result = nullptr;
  const aircomp_status s = aircomp_sweep_run(spec, o.jobs, o.save_solutions ? 1 : 0, &result);
  aircomp_sweep_free(spec);
  if (s) return report(s);
  // Per-row failures are recorded in the table; the sweep itself succeeded.
  if (const std::size_t failed = aircomp_sweep_result_failures(result)) {
    std::cerr << "warning: " << failed << " of " << aircomp_sweep_result_rows(result) << " rows failed\n";
  }
  const int code = emit(result, o, true);
  aircomp_sweep_result_free(result);
  return code;
}

int run_oracle_check(const Options& o) {
  aircomp_config* config = nullptr;
  aircomp_status s =
      o.config.empty() ? aircomp_config_parse(kOracleDefault, &config) : aircomp_config_load(o.config.c_str(), &config);
  if (s) return report(s);
  if (o.seed) aircomp_config_set_seed(config, *o.seed);
  OwnedString text;
  int passed = 0;
  s = aircomp_oracle_check(config, o.seeds, o.levels, &text.p, &passed);
  aircomp_config_free(config);
  if (s) return report(s);
  if (!write_output(o.out, text.str())) return kExitConfig;
  if (!passed) {
    std::cerr << "oracle check FAILED\n";
    return kExitSolver;
  }
  std::cerr << "oracle check passed\n";
  return kExitOk;
}

int run_selftest(const Options& o) {
  OwnedString text;
  int passed = 0;
  if (aircomp_status s = aircomp_selftest(&text.p, &passed)) return report(s);
  if (!write_output(o.out, text.str())) return kExitConfig;
  return passed ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted multi-cluster AirComp simulator"};
  app.set_version_flag("--version", std::string(aircomp_version()));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "Override the scenario seed (seed base for sweeps)");
    cmd->add_option("--out", o.out, "Output file (default: stdout)");
  };
  auto add_table = [&o](CLI::App* cmd) {
    cmd->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--save-solutions", o.save_solutions, "Write one JSON solution record per row to <out>.solutions/");
    cmd->add_flag("--timing", o.timing, "Report measured wall-clock seconds (output is then not reproducible)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Solve one instance with several algorithms");
  simulate->add_option("--config", o.config, "Scenario JSON (default: built-in scenario)")->check(CLI::ExistingFile);
  simulate->add_option("--algorithms", o.algorithms, "Comma-separated algorithm list (default: all but oracle)");
  add_common(simulate);
  add_table(simulate);

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one scenario axis");
  sweep->add_option("--config", o.config, "Sweep description JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_common(sweep);
  add_table(sweep);

  CLI::App* oracle = app.add_subcommand("oracle-check", "Certify solvers against a phase-grid oracle");
  oracle->add_option("--config", o.config, "Scenario JSON (default: L=2, K=1, N=2, J=2)")->check(CLI::ExistingFile);
  oracle->add_option("--seeds", o.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  oracle->add_option("--levels", o.levels, "Phase levels per element")->check(CLI::Range(2, 64));
  add_common(oracle);

  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in property suites");
  selftest->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*simulate) return run_simulate(o);
  if (*sweep) return run_sweep(o);
  if (*oracle) return run_oracle_check(o);
  return run_selftest(o);
}
