#include "aircomp/selftest.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "aircomp/bench.hpp"

namespace aircomp {

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)}); }

void run(std::vector<CheckResult>& out, const std::string& name, const std::function<std::string()>& body) {
  CheckResult r{name, false, ""};
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  out.push_back(std::move(r));
}

CMatrix random_psd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
  }
  return A * A.adjoint();
}

CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

SystemConfig small_config(std::uint64_t seed) {
  SystemConfig c;
  c.clusters = 3;
  c.devices_per_cluster = {3, 3, 3};
  c.irs_elements = 8;
  c.pattern_budget = 3;
  c.noise_power = {1e-11, 1e-11, 1e-11};
  c.weights = {1, 1, 1};
  c.seed = seed;
  return c;
}

std::string monotone(const Diagnostics& d) {
  for (std::size_t i = 1; i < d.objective_trace.size(); ++i) {
    if (d.trace_round[i] == d.trace_round[i - 1] && d.objective_trace[i] < d.objective_trace[i - 1] - 1e-8) {
      return "objective decreased at accepted iteration " + std::to_string(i);
    }
  }
  return {};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;

  run(out, "rate formulas", [] {
    std::ostringstream err;
    if (!close(path_loss_linear(1, 3.3, 30), 1e-3, 1e-12)) err << "path loss at 1 m; ";
    if (!close(computation_rate(16, 2, 4), 1.0, 1e-12)) err << "rate(16); ";
    if (computation_rate(0.5, 2, 4) != 0.0) err << "log2+ clamp; ";
    if (!close(effective_snr(0.01, 0.1, 1e-9, 1e-11), 10.0, 1e-12)) err << "snr; ";
    if (!close(volume_term(0.1, 1024 * 0.1 * 1e-11, 1e-11, 2, 4), 0.25, 1e-12)) err << "volume; ";
    const double c[] = {1.0, 3.0};
    const auto t = proportional_time_allocation(c, 0.1);
    if (!close(t[0], 0.025, 1e-12) || !close(t[1], 0.075, 1e-12)) err << "proportional allocation; ";
    return err.str();
  });

  run(out, "minorant and majorizer bounds (1e4 draws)", [] {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 10000; ++i) {
      const double e = u(rng), g = u(rng), e0 = u(rng), g0 = u(rng);
      if (bilinear_minorant(e, g, e0, g0) > e * g + 1e-12 * (1 + e * g)) return std::string("bilinear bound");
      if (!close(bilinear_minorant(e0, g0, e0, g0), e0 * g0, 1e-10)) return std::string("bilinear tightness");
      const int n = 1 + i % 4;
      const CMatrix Q = random_psd(rng, n);
      const CVector v = random_vector(rng, n), v0 = random_vector(rng, n);
      const double exact = v.dot(Q * v).real();
      if (quadratic_form_minorant(v, v0, Q) > exact + 1e-10 * (1 + std::abs(exact))) return std::string("quadratic bound");
      const double at0 = v0.dot(Q * v0).real();
      if (!close(quadratic_form_minorant(v0, v0, Q), at0, 1e-10)) return std::string("quadratic tightness");
      const CMatrix V = random_psd(rng, n), W = random_psd(rng, n);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(V, Eigen::EigenvaluesOnly);
      const double gap = V.trace().real() - es.eigenvalues()[n - 1];
      if (spectral_majorizer(V, W) < gap - 1e-10 * (1 + V.trace().real())) return std::string("majorizer bound");
      if (!close(spectral_majorizer(V, V), gap, 1e-10)) return std::string("majorizer tightness");
    }
    return std::string();
  });

  run(out, "channel determinism", [] {
    const SystemConfig c = small_config(7);
    const ChannelSet a = synthesize_channels(c), b = synthesize_channels(c);
    if (a.irs_ap != b.irs_ap || a.direct != b.direct) return std::string("channels differ between runs");
    return std::string();
  });

  run(out, "solver ascent and ordering (3 seeds)", [] {
    std::ostringstream err;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const SystemConfig c = small_config(seed);
      const ChannelSet ch = synthesize_channels(c);
      const Solution ad = solve_cluster_adaptive(c, ch);
      const Solution dy = solve_dynamic(c, ch, c.pattern_budget);
      const double ub = solve_upper_bound(c, ch).value;
      const double none = baseline_no_irs(c, ch).objective;
      if (auto m = monotone(ad.diagnostics); !m.empty()) err << "adaptive seed " << seed << ": " << m << "; ";
      if (auto m = monotone(dy.diagnostics); !m.empty()) err << "dynamic seed " << seed << ": " << m << "; ";
      if (ad.objective > ub * (1 + 1e-9)) err << "adaptive above bound, seed " << seed << "; ";
      if (none > dy.objective * (1 + 1e-9)) err << "no-IRS above dynamic, seed " << seed << "; ";
      if (ad.diagnostics.penalty_residual > 1e-7) err << "rank-one residual, seed " << seed << "; ";
      for (const Solution* s : {&ad, &dy}) {
        const Evaluation ev = evaluate_solution(c, ch, *s);
        if (!close(ev.objective, s->objective, 1e-6)) err << s->algorithm << " self-consistency; ";
      }
    }
    return err.str();
  });
  return out;
}

}  // namespace aircomp
