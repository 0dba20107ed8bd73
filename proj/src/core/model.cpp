#include "aircomp/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace aircomp {

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

const Position& Geometry::center_of(int cluster) const {
  if (cluster_centers.size() == 1) return cluster_centers.front();
  return cluster_centers.at(static_cast<std::size_t>(cluster));
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <typename T>
void broadcast(std::vector<T>& values, int n) {
  if (values.size() == 1 && n > 1) values.assign(static_cast<std::size_t>(n), values.front());
}

}  // namespace

void SystemConfig::broadcast_per_cluster() {
  broadcast(devices_per_cluster, clusters);
  broadcast(noise_power, clusters);
  broadcast(weights, clusters);
}

int SystemConfig::total_devices() const {
  int total = 0;
  for (int k : devices_per_cluster) total += k;
  return total;
}

double SystemConfig::rate_denominator() const {
  return static_cast<double>(quantization_bits) + std::log2(static_cast<double>(rate_devices));
}

void SystemConfig::validate() const {
  require(clusters >= 1, "L must be a positive integer");
  const auto L = static_cast<std::size_t>(clusters);
  require(devices_per_cluster.size() == L, "K_per_cluster must list one entry per cluster");
  for (int k : devices_per_cluster) require(k >= 1, "every K_per_cluster entry must be positive");
  require(irs_elements >= 0, "N must be nonnegative");
  require(pattern_budget >= 1 && pattern_budget <= clusters, "J must satisfy 1 <= J <= L");
  require(std::isfinite(frame_time) && frame_time > 0.0, "T_t must be strictly positive");
  require(std::isfinite(energy_budget) && energy_budget > 0.0, "E_max must be strictly positive");
  require(noise_power.size() == L, "noise_power must list one entry per cluster");
  for (double s : noise_power) require(std::isfinite(s) && s > 0.0, "noise_power entries must be strictly positive");
  require(quantization_bits >= 1, "m_tilde must be a positive integer");
  require(rate_devices >= 2, "K_tilde must be at least 2");
  require(weights.size() == L, "weights must list one entry per cluster");
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "weights must be nonnegative");
  require(std::isfinite(pathloss_ref_db), "pathloss_ref_db must be finite");
  require(std::isfinite(alpha_direct) && alpha_direct >= 0.0, "alpha_direct must be nonnegative");
  require(std::isfinite(alpha_irs) && alpha_irs >= 0.0, "alpha_irs must be nonnegative");
  require(geometry.cluster_centers.size() == 1 || geometry.cluster_centers.size() == L,
          "geometry.cluster_centers must hold one center or one per cluster");
  require(std::isfinite(geometry.placement_radius) && geometry.placement_radius >= 0.0,
          "geometry.radius must be nonnegative");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double path_loss_linear(double distance_m, double alpha, double ref_db) {
  if (!(distance_m >= 1.0)) {
    throw std::domain_error("path loss is undefined below the 1 m reference distance");
  }
  const double loss_db = ref_db + 10.0 * alpha * std::log10(distance_m);
  return std::pow(10.0, -loss_db / 10.0);
}

void ChannelSet::check_against(const SystemConfig& config) const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("channel set: " + what); };
  if (clusters() != config.clusters) fail("cluster count mismatch");
  if (elements() != config.irs_elements) fail("IRS element count mismatch");
  if (reflect.size() != direct.size()) fail("reflect/direct cluster count mismatch");
  if (!irs_ap.allFinite()) fail("non-finite IRS-AP channel");
  for (int l = 0; l < clusters(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    if (devices(l) != config.devices(l)) fail("device count mismatch in cluster " + std::to_string(l));
    if (reflect[ul].size() != direct[ul].size()) fail("reflect/direct device count mismatch");
    for (std::size_t k = 0; k < direct[ul].size(); ++k) {
      if (!std::isfinite(direct[ul][k].real()) || !std::isfinite(direct[ul][k].imag())) fail("non-finite direct channel");
      if (reflect[ul][k].size() != irs_ap.size()) fail("reflect vector length mismatch");
      if (!reflect[ul][k].allFinite()) fail("non-finite reflect channel");
    }
  }
}

bool BeamPattern::is_unit_modulus(double tol) const {
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    if (std::abs(std::abs(v[n]) - 1.0) > tol) return false;
  }
  return true;
}

BeamPattern BeamPattern::ones(int n) { return BeamPattern{CVector::Ones(n)}; }

BeamPattern BeamPattern::from_phases(const RVector& phases) {
  BeamPattern p{CVector(phases.size())};
  for (Eigen::Index n = 0; n < phases.size(); ++n) p.v[n] = std::polar(1.0, phases[n]);
  return p;
}

LiftedPattern LiftedPattern::from_pattern(const BeamPattern& pattern) {
  CVector vbar(pattern.size() + 1);
  vbar.head(pattern.size()) = pattern.v;
  vbar[pattern.size()] = 1.0;
  return LiftedPattern{vbar * vbar.adjoint()};
}

bool LiftedPattern::is_hermitian(double tol) const {
  if (V.rows() != V.cols()) return false;
  return (V - V.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, V.cwiseAbs().maxCoeff());
}

std::vector<std::vector<Position>> place_devices(const SystemConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::vector<Position>> positions(static_cast<std::size_t>(config.clusters));
  for (int l = 0; l < config.clusters; ++l) {
    const Position& c = config.geometry.center_of(l);
    auto& cluster = positions[static_cast<std::size_t>(l)];
    for (int k = 0; k < config.devices(l); ++k) {
      const double r = config.geometry.placement_radius * std::sqrt(uniform(rng));
      const double phi = 2.0 * std::numbers::pi * uniform(rng);
      cluster.push_back(Position{c.x + r * std::cos(phi), c.y + r * std::sin(phi), 0.0});
    }
  }
  return positions;
}

ChannelSet draw_channels(const SystemConfig& config, const std::vector<std::vector<Position>>& positions,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto fading = [&]() {
    const double re = normal(rng);
    const double im = normal(rng);
    return cplx(re, im);
  };
  const int N = config.irs_elements;
  const Geometry& geo = config.geometry;

  ChannelSet ch;
  ch.device_positions = positions;
  ch.irs_ap.resize(N);
  const double irs_ap_amp =
      N > 0 ? std::sqrt(path_loss_linear(distance(geo.irs, geo.access_point), config.alpha_irs, config.pathloss_ref_db))
            : 0.0;
  for (int n = 0; n < N; ++n) ch.irs_ap[n] = irs_ap_amp * fading();

  ch.direct.resize(static_cast<std::size_t>(config.clusters));
  ch.reflect.resize(static_cast<std::size_t>(config.clusters));
  for (int l = 0; l < config.clusters; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    for (int k = 0; k < config.devices(l); ++k) {
      const Position& p = positions.at(ul).at(static_cast<std::size_t>(k));
      const double direct_amp =
          std::sqrt(path_loss_linear(distance(p, geo.access_point), config.alpha_direct, config.pathloss_ref_db));
      ch.direct[ul].push_back(direct_amp * fading());
      CVector hr(N);
      if (N > 0) {
        const double reflect_amp =
            std::sqrt(path_loss_linear(distance(p, geo.irs), config.alpha_irs, config.pathloss_ref_db));
        for (int n = 0; n < N; ++n) hr[n] = reflect_amp * fading();
      }
      ch.reflect[ul].push_back(std::move(hr));
    }
  }
  return ch;
}

ChannelSet synthesize_channels(const SystemConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto positions = place_devices(config, rng);
  return draw_channels(config, positions, rng);
}

double composite_gain(const ChannelSet& channels, int cluster, int device, const BeamPattern& pattern) {
  const auto ul = static_cast<std::size_t>(cluster);
  const auto uk = static_cast<std::size_t>(device);
  const CVector& hr = channels.reflect.at(ul).at(uk);
  if (pattern.size() != channels.elements() || hr.size() != channels.irs_ap.size()) {
    throw std::invalid_argument("composite_gain: pattern length does not match the IRS size");
  }
  cplx he = channels.direct.at(ul).at(uk);
  for (Eigen::Index n = 0; n < hr.size(); ++n) {
    he += std::conj(pattern.v[n]) * std::conj(channels.irs_ap[n]) * hr[n];
  }
  return std::norm(he);
}

CVector lift_channel(const ChannelSet& channels, int cluster, int device) {
  const auto ul = static_cast<std::size_t>(cluster);
  const auto uk = static_cast<std::size_t>(device);
  const CVector& hr = channels.reflect.at(ul).at(uk);
  const int N = channels.elements();
  CVector q(N + 1);
  for (int n = 0; n < N; ++n) q[n] = std::conj(channels.irs_ap[n]) * hr[n];
  q[N] = channels.direct.at(ul).at(uk);
  return q;
}

MinGain min_gain(const ChannelSet& channels, int cluster, const BeamPattern& pattern) {
  const int K = channels.devices(cluster);
  if (K == 0) throw std::invalid_argument("min_gain: empty cluster");
  MinGain best{composite_gain(channels, cluster, 0, pattern), 0};
  for (int k = 1; k < K; ++k) {
    const double g = composite_gain(channels, cluster, k, pattern);
    if (g < best.value) best = MinGain{g, k};
  }
  return best;
}

MinGain min_direct_gain(const ChannelSet& channels, int cluster) {
  const auto& d = channels.direct.at(static_cast<std::size_t>(cluster));
  if (d.empty()) throw std::invalid_argument("min_direct_gain: empty cluster");
  MinGain best{std::norm(d[0]), 0};
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (std::norm(d[k]) < best.value) best = MinGain{std::norm(d[k]), static_cast<int>(k)};
  }
  return best;
}

}  // namespace aircomp
