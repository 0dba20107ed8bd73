#pragma once

#include <random>

#include "aircomp/bench.hpp"

namespace testutil {

using namespace aircomp;

inline SystemConfig small_config(int L, int K, int N, int J, std::uint64_t seed = 1) {
  SystemConfig c;
  c.clusters = L;
  c.irs_elements = N;
  c.pattern_budget = J;
  c.seed = seed;
  const auto n = static_cast<std::size_t>(L);
  c.devices_per_cluster.assign(n, K);
  c.noise_power.assign(n, c.noise_power.front());
  c.weights.assign(n, 1.0);
  return c;
}

// Zero channels of the given shape; callers fill in what they need.
inline ChannelSet blank_channels(int L, int K, int N) {
  ChannelSet ch;
  ch.irs_ap = CVector::Zero(N);
  ch.direct.assign(static_cast<std::size_t>(L), std::vector<cplx>(static_cast<std::size_t>(K)));
  ch.reflect.assign(static_cast<std::size_t>(L), std::vector<CVector>(static_cast<std::size_t>(K), CVector::Zero(N)));
  ch.device_positions.assign(static_cast<std::size_t>(L), std::vector<Position>(static_cast<std::size_t>(K)));
  return ch;
}

inline CVector random_cvector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
  return v;
}

inline CMatrix random_psd(std::mt19937_64& rng, int n, int rank) {
  CMatrix M = CMatrix::Zero(n, n);
  for (int r = 0; r < rank; ++r) {
    const CVector u = random_cvector(rng, n);
    M += u * u.adjoint();
  }
  return M;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace testutil
