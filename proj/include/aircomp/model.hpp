#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "aircomp/types.hpp"

namespace aircomp {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Position& a, const Position& b);

struct Geometry {
  Position access_point{0.0, 0.0, 10.0};
  Position irs{10.0, 0.0, 10.0};
  // One entry per cluster. A single entry is broadcast to every cluster.
  std::vector<Position> cluster_centers{Position{10.0, 10.0, 0.0}};
  double placement_radius = 10.0;

  const Position& center_of(int cluster) const;
};

// All scenario constants. Defaults reproduce the reference deployment:
// AP at (0,0,10), IRS at (10,0,10), devices within 10 m of (10,10,0).
struct SystemConfig {
  int clusters = 5;                                  // L
  std::vector<int> devices_per_cluster{5, 5, 5, 5, 5};  // K_l
  int irs_elements = 20;                             // N
  int pattern_budget = 5;                            // J
  double frame_time = 0.1;                           // T_t [s]
  double energy_budget = 0.01;                       // E_max [J]
  std::vector<double> noise_power{1e-11, 1e-11, 1e-11, 1e-11, 1e-11};  // sigma_l^2 [W]
  int quantization_bits = 2;                         // m~
  int rate_devices = 5;                              // K~
  std::vector<double> weights{1, 1, 1, 1, 1};        // w_l
  double pathloss_ref_db = 30.0;
  double alpha_direct = 3.3;
  double alpha_irs = 2.3;
  Geometry geometry;
  std::uint64_t seed = 1;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  int devices(int cluster) const { return devices_per_cluster.at(static_cast<std::size_t>(cluster)); }
  int total_devices() const;
  double noise(int cluster) const { return noise_power.at(static_cast<std::size_t>(cluster)); }
  double weight(int cluster) const { return weights.at(static_cast<std::size_t>(cluster)); }
  // m~ + log2 K~
  double rate_denominator() const;

  // Resizes per-cluster lists to `clusters`, repeating the first entry.
  void broadcast_per_cluster();
};

double dbm_to_watts(double dbm);

// Linear power attenuation 10^(-(ref_db + 10 alpha log10 d)/10); d >= 1 m.
double path_loss_linear(double distance_m, double alpha, double ref_db);

// Complex baseband channels for one scenario draw.
struct ChannelSet {
  std::vector<std::vector<cplx>> direct;      // h^d[l][k]
  std::vector<std::vector<CVector>> reflect;  // h^r[l][k], length N
  CVector irs_ap;                             // g, shared by all clusters
  std::vector<std::vector<Position>> device_positions;

  int clusters() const { return static_cast<int>(direct.size()); }
  int devices(int cluster) const { return static_cast<int>(direct.at(static_cast<std::size_t>(cluster)).size()); }
  int elements() const { return static_cast<int>(irs_ap.size()); }

  // Throws std::invalid_argument unless shapes match `config` and all entries are finite.
  void check_against(const SystemConfig& config) const;
};

// One IRS phase configuration; every entry has unit modulus.
struct BeamPattern {
  CVector v;

  int size() const { return static_cast<int>(v.size()); }
  bool is_unit_modulus(double tol = 1e-9) const;
  static BeamPattern ones(int n);
  static BeamPattern from_phases(const RVector& phases);
};

// (N+1)x(N+1) Hermitian matrix standing in for [v;1][v;1]^H.
struct LiftedPattern {
  CMatrix V;

  static LiftedPattern from_pattern(const BeamPattern& pattern);
  bool is_hermitian(double tol = 1e-9) const;
};

// Device placement, drawn uniformly over each cluster's disk at z = 0.
// Consumes two uniforms per device, clusters in order, devices in order.
std::vector<std::vector<Position>> place_devices(const SystemConfig& config, std::mt19937_64& rng);

// Small-scale Rayleigh fading scaled by path loss. Draw order: g (N entries),
// then for each cluster and device h^d followed by h^r (N entries). Each
// complex entry consumes two standard normals (real, imaginary).
ChannelSet draw_channels(const SystemConfig& config, const std::vector<std::vector<Position>>& positions,
                         std::mt19937_64& rng);

// place_devices followed by draw_channels on one generator seeded with config.seed.
ChannelSet synthesize_channels(const SystemConfig& config);

// |h^d + v^H diag(g^H) h^r|^2
double composite_gain(const ChannelSet& channels, int cluster, int device, const BeamPattern& pattern);

// q = [diag(g^H) h^r ; h^d], so that |h^e|^2 = |[v;1]^H q|^2.
CVector lift_channel(const ChannelSet& channels, int cluster, int device);

struct MinGain {
  double value = 0.0;
  int device = 0;
};

// Weakest composite gain in a cluster; ties resolve to the lowest device index.
MinGain min_gain(const ChannelSet& channels, int cluster, const BeamPattern& pattern);

// Same minimum evaluated on the direct links only (IRS switched off).
MinGain min_direct_gain(const ChannelSet& channels, int cluster);

// Gain of a relaxed lifted vector vbar (length N+1) against lifted channel q.
inline double lifted_gain(const CVector& vbar, const CVector& q) { return std::norm(vbar.dot(q)); }

}  // namespace aircomp
