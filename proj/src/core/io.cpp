#include "aircomp/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aircomp {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

template <typename T>
std::vector<T> scalar_or_list(const json& j, const std::string& key) {
  if (j.is_array()) {
    std::vector<T> out;
    for (const auto& e : j) out.push_back(get_as<T>(e, key));
    if (out.empty()) throw ConfigError("key '" + key + "' must not be empty");
    return out;
  }
  return {get_as<T>(j, key)};
}

Position parse_position(const json& j, const std::string& key) {
  const auto v = scalar_or_list<double>(j, key);
  if (v.size() != 3) throw ConfigError("key '" + key + "' must be a 3-element [x, y, z] array");
  return Position{v[0], v[1], v[2]};
}

ojson position_json(const Position& p) { return ojson::array({p.x, p.y, p.z}); }

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

template <typename T>
void fit_list(std::vector<T>& v, bool given, const T& fallback, int L, const std::string& key) {
  if (!given) {
    v.assign(static_cast<std::size_t>(L), fallback);
  } else if (v.size() == 1) {
    v.assign(static_cast<std::size_t>(L), v.front());
  } else if (static_cast<int>(v.size()) != L) {
    throw ConfigError("key '" + key + "' must list one entry per cluster (L = " + std::to_string(L) + ")");
  }
}

SystemConfig config_from(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  reject_unknown(j,
                 {"L", "K_per_cluster", "N", "J", "T_t", "E_max", "noise_power", "noise_power_dbm", "m_tilde",
                  "K_tilde", "weights", "pathloss_ref_db", "alpha_direct", "alpha_irs", "geometry", "seed"},
                 "scenario config");
  if (j.contains("noise_power") && j.contains("noise_power_dbm")) {
    throw ConfigError("give either noise_power or noise_power_dbm, not both");
  }
  SystemConfig c;
  const SystemConfig d;
  if (j.contains("L")) c.clusters = get_as<int>(j["L"], "L");
  if (j.contains("N")) c.irs_elements = get_as<int>(j["N"], "N");
  if (j.contains("J")) c.pattern_budget = get_as<int>(j["J"], "J");
  if (j.contains("T_t")) c.frame_time = get_as<double>(j["T_t"], "T_t");
  if (j.contains("E_max")) c.energy_budget = get_as<double>(j["E_max"], "E_max");
  if (j.contains("m_tilde")) c.quantization_bits = get_as<int>(j["m_tilde"], "m_tilde");
  if (j.contains("K_tilde")) c.rate_devices = get_as<int>(j["K_tilde"], "K_tilde");
  if (j.contains("pathloss_ref_db")) c.pathloss_ref_db = get_as<double>(j["pathloss_ref_db"], "pathloss_ref_db");
  if (j.contains("alpha_direct")) c.alpha_direct = get_as<double>(j["alpha_direct"], "alpha_direct");
  if (j.contains("alpha_irs")) c.alpha_irs = get_as<double>(j["alpha_irs"], "alpha_irs");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (c.clusters < 1) throw ConfigError("L must be a positive integer");
  // An unstated J follows a smaller L instead of tripping J <= L.
  if (!j.contains("J")) c.pattern_budget = std::min(c.pattern_budget, c.clusters);

  const bool has_k = j.contains("K_per_cluster");
  if (has_k) c.devices_per_cluster = scalar_or_list<int>(j["K_per_cluster"], "K_per_cluster");
  fit_list(c.devices_per_cluster, has_k, d.devices_per_cluster.front(), c.clusters, "K_per_cluster");

  bool has_noise = false;
  if (j.contains("noise_power")) {
    c.noise_power = scalar_or_list<double>(j["noise_power"], "noise_power");
    has_noise = true;
  } else if (j.contains("noise_power_dbm")) {
    c.noise_power.clear();
    for (double dbm : scalar_or_list<double>(j["noise_power_dbm"], "noise_power_dbm")) {
      c.noise_power.push_back(dbm_to_watts(dbm));
    }
    has_noise = true;
  }
  fit_list(c.noise_power, has_noise, d.noise_power.front(), c.clusters, "noise_power");

  const bool has_w = j.contains("weights");
  if (has_w) c.weights = scalar_or_list<double>(j["weights"], "weights");
  fit_list(c.weights, has_w, d.weights.front(), c.clusters, "weights");

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    if (!g.is_object()) throw ConfigError("geometry must be an object");
    reject_unknown(g, {"access_point", "irs", "cluster_centers", "radius"}, "geometry");
    if (g.contains("access_point")) c.geometry.access_point = parse_position(g["access_point"], "geometry.access_point");
    if (g.contains("irs")) c.geometry.irs = parse_position(g["irs"], "geometry.irs");
    if (g.contains("radius")) c.geometry.placement_radius = get_as<double>(g["radius"], "geometry.radius");
    if (g.contains("cluster_centers")) {
      const json& cc = g["cluster_centers"];
      if (!cc.is_array() || cc.empty()) throw ConfigError("geometry.cluster_centers must be a nonempty array");
      c.geometry.cluster_centers.clear();
      if (cc.front().is_number()) {
        c.geometry.cluster_centers.push_back(parse_position(cc, "geometry.cluster_centers"));
      } else {
        for (const auto& p : cc) c.geometry.cluster_centers.push_back(parse_position(p, "geometry.cluster_centers"));
      }
    }
  }
  c.validate();
  return c;
}

ojson config_json(const SystemConfig& c) {
  ojson j;
  j["L"] = c.clusters;
  j["K_per_cluster"] = c.devices_per_cluster;
  j["N"] = c.irs_elements;
  j["J"] = c.pattern_budget;
  j["T_t"] = c.frame_time;
  j["E_max"] = c.energy_budget;
  j["noise_power"] = c.noise_power;
  j["m_tilde"] = c.quantization_bits;
  j["K_tilde"] = c.rate_devices;
  j["weights"] = c.weights;
  j["pathloss_ref_db"] = c.pathloss_ref_db;
  j["alpha_direct"] = c.alpha_direct;
  j["alpha_irs"] = c.alpha_irs;
  ojson g;
  g["access_point"] = position_json(c.geometry.access_point);
  g["irs"] = position_json(c.geometry.irs);
  g["cluster_centers"] = ojson::array();
  for (const auto& p : c.geometry.cluster_centers) g["cluster_centers"].push_back(position_json(p));
  g["radius"] = c.geometry.placement_radius;
  j["geometry"] = g;
  j["seed"] = c.seed;
  return j;
}

ojson matrix_json(const RMatrix& m) {
  ojson out = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

RMatrix matrix_from(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.front().size()) : 0;
  RMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("'" + key + "' is ragged");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_as<double>(row[static_cast<std::size_t>(c)], key);
  }
  return m;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

SystemConfig parse_config(const std::string& json_text) { return config_from(parse_text(json_text, "scenario config")); }

SystemConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_to_json(const SystemConfig& config) { return config_json(config).dump(2) + "\n"; }

SweepSpec parse_sweep(const std::string& json_text) {
  const json j = parse_text(json_text, "sweep spec");
  if (!j.is_object()) throw ConfigError("sweep spec must be a JSON object");
  reject_unknown(j, {"axis", "values", "trials", "algorithms", "random_draws", "oracle_levels", "base_config"},
                 "sweep spec");
  SweepSpec s;
  if (!j.contains("axis")) throw ConfigError("sweep spec needs 'axis'");
  s.axis = parse_axis(get_as<std::string>(j["axis"], "axis"));
  if (!j.contains("values")) throw ConfigError("sweep spec needs 'values'");
  s.values = scalar_or_list<double>(j["values"], "values");
  if (j.contains("trials")) s.trials = get_as<int>(j["trials"], "trials");
  if (j.contains("algorithms")) {
    s.algorithms = scalar_or_list<std::string>(j["algorithms"], "algorithms");
  } else {
    s.algorithms = {"dynamic", "random_bf", "no_irs"};
  }
  if (j.contains("random_draws")) s.random_draws = get_as<int>(j["random_draws"], "random_draws");
  if (j.contains("oracle_levels")) s.oracle_levels = get_as<int>(j["oracle_levels"], "oracle_levels");
  if (j.contains("base_config")) s.base_config = config_from(j["base_config"]);
  s.validate();
  return s;
}

SweepSpec load_sweep(const std::string& path) { return parse_sweep(read_text_file(path)); }

std::string solution_to_json(const SystemConfig& config, const Solution& s) {
  ojson j;
  j["algorithm"] = s.algorithm;
  j["config"] = config_json(config);
  j["objective"] = s.objective;
  j["mean_rate"] = s.objective / config.frame_time;
  j["per_cluster_rates"] = s.per_cluster_rates;
  j["patterns"] = ojson::array();
  for (const auto& p : s.patterns) {
    ojson ph = ojson::array();
    for (Eigen::Index n = 0; n < p.v.size(); ++n) ph.push_back(std::arg(p.v[n]));
    j["patterns"].push_back(ph);
  }
  j["times"] = matrix_json(s.allocation.times);
  j["energies"] = matrix_json(s.allocation.energies);
  j["association"] = s.association;
  std::vector<int> split;
  for (bool b : s.split) split.push_back(b ? 1 : 0);
  j["split"] = split;
  ojson d;
  d["iterations"] = s.diagnostics.iterations;
  d["outer_iterations"] = s.diagnostics.outer_iterations;
  d["penalty_residual"] = s.diagnostics.penalty_residual;
  d["split_fraction"] = s.diagnostics.split_fraction;
  d["relaxed_objective"] = s.diagnostics.relaxed_objective;
  d["flags"] = s.diagnostics.flags;
  d["objective_trace"] = s.diagnostics.objective_trace;
  j["diagnostics"] = d;
  return j.dump(2) + "\n";
}

SavedSolution parse_solution(const std::string& json_text) {
  const json j = parse_text(json_text, "solution record");
  if (!j.is_object() || !j.contains("config") || !j.contains("times") || !j.contains("energies") ||
      !j.contains("patterns")) {
    throw ConfigError("solution record lacks config, patterns, times or energies");
  }
  SavedSolution out;
  out.config = config_from(j["config"]);
  Solution& s = out.solution;
  if (j.contains("algorithm")) s.algorithm = get_as<std::string>(j["algorithm"], "algorithm");
  for (const auto& ph : j["patterns"]) {
    const auto v = ph.empty() ? std::vector<double>{} : scalar_or_list<double>(ph, "patterns");
    RVector phases(static_cast<Eigen::Index>(v.size()));
    for (std::size_t n = 0; n < v.size(); ++n) phases[static_cast<Eigen::Index>(n)] = v[n];
    s.patterns.push_back(BeamPattern::from_phases(phases));
  }
  s.allocation.times = matrix_from(j["times"], "times");
  s.allocation.energies = matrix_from(j["energies"], "energies");
  if (j.contains("objective")) s.objective = get_as<double>(j["objective"], "objective");
  if (j.contains("association")) s.association = get_as<std::vector<int>>(j["association"], "association");
  return out;
}

}  // namespace aircomp
