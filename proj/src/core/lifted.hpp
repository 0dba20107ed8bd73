#pragma once

// Helpers shared by the lifted-domain solvers. Not part of the public API.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "aircomp/convex.hpp"
#include "aircomp/model.hpp"

namespace aircomp::detail {

// Reported objective units per normalized unit: T_t / ((m~ + log2 K~) ln 2).
inline double volume_scale(const SystemConfig& config) {
  return config.frame_time / (config.rate_denominator() * std::numbers::ln2);
}

inline std::vector<CVector> lifted_channels(const ChannelSet& channels, int cluster) {
  std::vector<CVector> q;
  for (int k = 0; k < channels.devices(cluster); ++k) q.push_back(lift_channel(channels, cluster, k));
  return q;
}

// Best gain the weakest device could reach alone, min_k (sum_i |q_ki|)^2.
inline double bottleneck_scale(const std::vector<CVector>& q, int* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double s = q[k].cwiseAbs().sum();
    if (s * s < best) {
      best = s * s;
      if (argmin) *argmin = static_cast<int>(k);
    }
  }
  return best;
}

inline double min_relaxed_gain(const CVector& vbar, const std::vector<CVector>& q) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& qk : q) g = std::min(g, lifted_gain(vbar, qk));
  return g;
}

// w (t ln t - t ln S - t ln C) over local variables [t, S]; the negated
// normalized volume t ln(C S / t).
inline convex::LocalFunction negative_volume(double w, double log_c) {
  return [w, log_c](const RVector& x, convex::LocalEval& out, bool derivatives) {
    const double t = x[0];
    const double S = x[1];
    if (!(t > 0.0) || !(S > 0.0)) return false;
    const double lt = std::log(t);
    const double ls = std::log(S);
    out.value = w * t * (lt - ls - log_c);
    if (derivatives) {
      out.gradient.resize(2);
      out.gradient << w * (lt + 1.0 - ls - log_c), -w * t / S;
      out.hessian.resize(2, 2);
      out.hessian << w / t, -w / S, -w / S, w * t / (S * S);
    }
    return true;
  };
}

}  // namespace aircomp::detail
