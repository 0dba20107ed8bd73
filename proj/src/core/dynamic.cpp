#include "aircomp/dynamic.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "aircomp/convex.hpp"
#include "lifted.hpp"

namespace aircomp {

namespace {

using detail::bottleneck_scale;
using detail::lifted_channels;
using detail::min_relaxed_gain;
using detail::volume_scale;

constexpr double kPush = 1e-6;          // interior push for boundary start points
constexpr double kShrink = 1.0 - 1e-10;  // strict slack on gamma and S at the start point

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CVector lift_pattern(const CVector& v) {
  CVector vbar(v.size() + 1);
  vbar.head(v.size()) = v;
  vbar[v.size()] = 1.0;
  return vbar;
}

// Per-cluster data in normalized units (gain / s, energy / E, time / T).
struct ClusterScale {
  bool active = false;
  std::vector<CVector> q;  // lifted channels / sqrt(s)
  double scale = 0.0;
  double log_c = 0.0;  // ln(E s / (T sigma^2))
  double weight = 0.0;
};

std::vector<ClusterScale> cluster_scales(const SystemConfig& config, const ChannelSet& channels) {
  std::vector<ClusterScale> out(static_cast<std::size_t>(config.clusters));
  for (int l = 0; l < config.clusters; ++l) {
    auto& c = out[static_cast<std::size_t>(l)];
    c.q = lifted_channels(channels, l);
    c.scale = bottleneck_scale(c.q);
    c.weight = config.weight(l);
    c.active = c.weight > 0.0 && c.scale > 0.0;
    if (!c.active) continue;
    for (auto& qk : c.q) qk /= std::sqrt(c.scale);
    c.log_c = std::log(config.energy_budget * c.scale / (config.frame_time * config.noise(l)));
  }
  return out;
}

// gamma <= 2 Re{conj(z0) z(v)} - |z0|^2 with z(v) = vbar^H q, written as a row over
// [gamma, Re v_0..Re v_{N-1}, Im v_0..Im v_{N-1}].
void add_gain_minorant(convex::Program& prog, int gamma_var, int pattern_offset, int N, const CVector& q,
                       const CVector& vbar0) {
  const cplx z0 = vbar0.dot(q);
  const double xr = z0.real();
  const double xi = z0.imag();
  std::vector<int> vars{gamma_var};
  std::vector<double> coefs{1.0};
  for (int n = 0; n < N; ++n) {
    vars.push_back(pattern_offset + n);
    coefs.push_back(-2.0 * (xr * q[n].real() + xi * q[n].imag()));
  }
  for (int n = 0; n < N; ++n) {
    vars.push_back(pattern_offset + N + n);
    coefs.push_back(-2.0 * (xr * q[n].imag() - xi * q[n].real()));
  }
  const double rhs = 2.0 * (xr * q[N].real() + xi * q[N].imag()) - std::norm(z0);
  prog.add_linear_inequality(std::move(vars), std::move(coefs), rhs);
}

convex::LocalFunction unit_disk() {
  return [](const RVector& x, convex::LocalEval& out, bool derivatives) {
    out.value = x[0] * x[0] + x[1] * x[1] - 1.0;
    if (derivatives) {
      out.gradient.resize(2);
      out.gradient << 2.0 * x[0], 2.0 * x[1];
      out.hessian = 2.0 * RMatrix::Identity(2, 2);
    }
    return true;
  };
}

// S - bilinear_minorant(e, g; e0, g0) <= 0 over [e, g, S].
convex::LocalFunction bilinear_constraint(double e0, double g0) {
  const double x0 = e0 + g0;
  return [x0](const RVector& x, convex::LocalEval& out, bool derivatives) {
    const double e = x[0];
    const double g = x[1];
    out.value = x[2] - (x0 * x0 / 2.0 + x0 * (e + g - x0) - (e * e + g * g) / 2.0);
    if (derivatives) {
      out.gradient.resize(3);
      out.gradient << e - x0, g - x0, 1.0;
      out.hessian = RMatrix::Zero(3, 3);
      out.hessian(0, 0) = 1.0;
      out.hessian(1, 1) = 1.0;
    }
    return true;
  };
}

void add_unit_disks(convex::Program& prog, int offset, int N) {
  for (int n = 0; n < N; ++n) prog.add_inequality({offset + n, offset + N + n}, unit_disk());
}

void write_pattern(RVector& x, int offset, const CVector& vbar, int N) {
  for (int n = 0; n < N; ++n) {
    x[offset + n] = vbar[n].real();
    x[offset + N + n] = vbar[n].imag();
  }
}

CVector read_pattern(const RVector& x, int offset, int N) {
  CVector vbar(N + 1);
  for (int n = 0; n < N; ++n) vbar[n] = cplx(x[offset + n], x[offset + N + n]);
  vbar[N] = 1.0;
  return vbar;
}

// Pulls entries with |v_n| >= 1 - kPush back inside the unit disk.
CVector push_pattern(const CVector& vbar) {
  CVector out = vbar;
  const Eigen::Index N = vbar.size() - 1;
  for (Eigen::Index n = 0; n < N; ++n) {
    const double a = std::abs(out[n]);
    if (a > 1.0 - kPush) out[n] *= (1.0 - kPush) / a;
  }
  return out;
}

// Mixes a budget row toward uniform when it touches the boundary of {x > 0, sum x < 1}.
void push_simplex(std::vector<double>& x) {
  if (x.empty()) return;
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  const bool boundary = sum >= 1.0 - kPush || std::any_of(x.begin(), x.end(), [](double v) { return !(v > 0.0); });
  if (!boundary) return;
  const double u = 1.0 / static_cast<double>(x.size());
  for (double& v : x) v = (1.0 - kPush) * ((1.0 - kPush) * std::max(v, 0.0) + kPush * u);
}


Solution polish_patterns(const SystemConfig& config, const ChannelSet& channels, const std::vector<CVector>& relaxed,
                         const std::string& algorithm, std::vector<int> assignment = {}) {
  std::vector<BeamPattern> patterns;
  for (const auto& vbar : relaxed) patterns.push_back(project_unit_modulus(vbar.head(vbar.size() - 1)));
  return allocate_single_slot(config, channels, std::move(patterns), std::move(assignment), algorithm);
}

void merge_flags(Diagnostics& into, const Diagnostics& from) {
  for (const auto& f : from.flags) {
    if (!into.has_flag(f)) into.flags.push_back(f);
  }
}

void add_flag(Diagnostics& d, const std::string& f) {
  if (!d.has_flag(f)) d.flags.push_back(f);
}

}  // namespace

double bilinear_minorant(double e, double gamma, double e_exp, double gamma_exp) {
  const double x0 = e_exp + gamma_exp;
  return (x0 * x0 + 2.0 * x0 * (e + gamma - x0) - (e * e + gamma * gamma)) / 2.0;
}

double quadratic_form_minorant(const CVector& vbar, const CVector& vbar_exp, const CMatrix& Q) {
  if (Q.rows() != Q.cols() || Q.rows() != vbar.size() || vbar.size() != vbar_exp.size()) {
    throw std::invalid_argument("quadratic_form_minorant: dimension mismatch");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("quadratic_form_minorant: Q is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (Q + Q.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()[0] < -1e-10 * scale) throw std::invalid_argument("quadratic_form_minorant: Q is not PSD");
  const cplx cross = vbar_exp.dot(Q * vbar);
  return 2.0 * cross.real() - vbar_exp.dot(Q * vbar_exp).real();
}

BeamPattern project_unit_modulus(const CVector& v_relaxed) {
  BeamPattern p{CVector(v_relaxed.size())};
  for (Eigen::Index n = 0; n < v_relaxed.size(); ++n) {
    const double a = std::abs(v_relaxed[n]);
    p.v[n] = a > 0.0 ? v_relaxed[n] / a : cplx(1.0, 0.0);
  }
  return p;
}

Association extract_association(const Solution& solution, double frame_time) {
  const RMatrix& t = solution.allocation.times;
  const double threshold = 1e-6 * frame_time;
  Association a;
  const auto L = static_cast<std::size_t>(t.rows());
  a.pattern.assign(L, -1);
  a.split.assign(L, false);
  a.inactive.assign(L, false);
  int active = 0;
  int split = 0;
  for (Eigen::Index l = 0; l < t.rows(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    int above = 0;
    Eigen::Index best = 0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (t(l, j) >= threshold) ++above;
      if (t(l, j) > t(l, best)) best = j;
    }
    if (above == 0) {
      a.inactive[ul] = true;
      continue;
    }
    ++active;
    a.pattern[ul] = static_cast<int>(best);
    if (above > 1) {
      a.split[ul] = true;
      ++split;
    }
  }
  a.split_fraction = active > 0 ? static_cast<double>(split) / active : 0.0;
  return a;
}

DynamicState initial_dynamic_state(const SystemConfig& config, const ChannelSet& channels,
                                   const std::vector<BeamPattern>& patterns) {
  const int L = config.clusters;
  const int J = static_cast<int>(patterns.size());
  if (J < 1) throw std::invalid_argument("initial_dynamic_state: need at least one pattern");
  DynamicState s;
  for (const auto& p : patterns) {
    if (p.size() != channels.elements()) throw std::invalid_argument("initial_dynamic_state: pattern length");
    s.patterns_relaxed.push_back(lift_pattern(p.v));
  }
  s.times = RMatrix::Constant(L, J, config.frame_time / (L * J));
  s.energies = RMatrix::Constant(L, J, config.energy_budget / J);
  s.gammas.resize(L, J);
  s.slacks.resize(L, J);
  for (int l = 0; l < L; ++l) {
    const auto q = lifted_channels(channels, l);
    for (int j = 0; j < J; ++j) {
      s.gammas(l, j) = min_relaxed_gain(s.patterns_relaxed[static_cast<std::size_t>(j)], q);
      s.slacks(l, j) = s.energies(l, j) * s.gammas(l, j);
    }
  }
  s.expansion = DynamicPoint{s.energies, s.gammas, s.patterns_relaxed};
  return s;
}

DynamicState dynamic_state_from_solution(const SystemConfig& config, const ChannelSet& channels,
                                         const Solution& solution) {
  if (solution.patterns.empty()) throw std::invalid_argument("dynamic_state_from_solution: no patterns");
  DynamicState s = initial_dynamic_state(config, channels, solution.patterns);
  if (solution.allocation.times.rows() != config.clusters ||
      solution.allocation.times.cols() != static_cast<Eigen::Index>(solution.patterns.size())) {
    throw std::invalid_argument("dynamic_state_from_solution: allocation shape");
  }
  s.times = solution.allocation.times;
  s.energies = solution.allocation.energies;
  s.slacks = s.energies.cwiseProduct(s.gammas);
  s.expansion = DynamicPoint{s.energies, s.gammas, s.patterns_relaxed};
  return s;
}

double relaxed_objective(const SystemConfig& config, const ChannelSet& channels, const DynamicState& state) {
  double total = 0.0;
  for (int l = 0; l < config.clusters; ++l) {
    const auto q = lifted_channels(channels, l);
    for (int j = 0; j < state.slots(); ++j) {
      const double g = min_relaxed_gain(state.patterns_relaxed[static_cast<std::size_t>(j)], q);
      total += config.weight(l) * volume_term(state.times(l, j), state.energies(l, j) * g, config.noise(l),
                                              config.quantization_bits, config.rate_devices);
    }
  }
  return total;
}

DynamicStepResult dynamic_subproblem(const ChannelSet& channels, const SystemConfig& config,
                                     const DynamicState& state) {
  const int L = config.clusters;
  const int J = state.slots();
  const int N = channels.elements();
  if (J < 1 || state.times.rows() != L || state.times.cols() != J) {
    throw std::invalid_argument("dynamic_subproblem: state shape does not match the config");
  }
  const auto clusters = cluster_scales(config, channels);
  std::vector<int> active;
  for (int l = 0; l < L; ++l) {
    if (clusters[static_cast<std::size_t>(l)].active) active.push_back(l);
  }
  const int A = static_cast<int>(active.size());
  const double kappa = volume_scale(config);

  DynamicStepResult res;
  res.state = state;
  if (A == 0) return res;

  // Expansion point (normalized) and its interior push.
  std::vector<CVector> v0 = state.patterns_relaxed;
  std::vector<CVector> vs;
  for (const auto& v : v0) vs.push_back(push_pattern(v));
  RMatrix es = RMatrix::Zero(L, J);
  RMatrix ts = RMatrix::Zero(L, J);
  std::vector<double> tflat;
  for (int l : active) {
    std::vector<double> row;
    for (int j = 0; j < J; ++j) {
      row.push_back(state.energies(l, j) / config.energy_budget);
      tflat.push_back(state.times(l, j) / config.frame_time);
    }
    push_simplex(row);
    for (int j = 0; j < J; ++j) es(l, j) = row[static_cast<std::size_t>(j)];
  }
  push_simplex(tflat);
  {
    std::size_t i = 0;
    for (int l : active) {
      for (int j = 0; j < J; ++j) ts(l, j) = tflat[i++];
    }
  }
  RMatrix e0(L, J);
  for (int l : active) {
    for (int j = 0; j < J; ++j) e0(l, j) = std::max(0.0, state.energies(l, j) / config.energy_budget);
  }

  RMatrix g0(L, J);
  RMatrix gs(L, J);
  RMatrix Ss(L, J);
  auto build_start = [&]() {
    for (int l : active) {
      const auto& q = clusters[static_cast<std::size_t>(l)].q;
      for (int j = 0; j < J; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        g0(l, j) = min_relaxed_gain(v0[uj], q);
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& qk : q) {
          const cplx z0 = v0[uj].dot(qk);
          lo = std::min(lo, 2.0 * std::real(std::conj(z0) * vs[uj].dot(qk)) - std::norm(z0));
        }
        gs(l, j) = kShrink * lo;
        Ss(l, j) = kShrink * bilinear_minorant(es(l, j), gs(l, j), e0(l, j), g0(l, j));
        if (!(gs(l, j) > 0.0) || !(Ss(l, j) > 0.0)) return false;
      }
    }
    return true;
  };
  if (!build_start()) {
    v0 = vs;
    e0 = es;
    if (!build_start()) throw SolverError("dynamic subproblem: no strictly feasible start (zero gain)");
  }

  const int pattern_base = 4 * A * J;
  const int n = pattern_base + 2 * N * J;
  auto var = [J](int a, int j, int k) { return 4 * (a * J + j) + k; };  // k: 0 t, 1 e, 2 gamma, 3 S
  auto poff = [pattern_base, N](int j) { return pattern_base + 2 * N * j; };

  convex::Program prog(n);
  RVector x(n);
  std::vector<int> all_t;
  for (int a = 0; a < A; ++a) {
    const int l = active[static_cast<std::size_t>(a)];
    const auto& c = clusters[static_cast<std::size_t>(l)];
    std::vector<int> row_e;
    for (int j = 0; j < J; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const int it = var(a, j, 0), ie = var(a, j, 1), ig = var(a, j, 2), iS = var(a, j, 3);
      prog.add_objective({it, iS}, detail::negative_volume(c.weight, c.log_c));
      prog.add_inequality({ie, ig, iS}, bilinear_constraint(e0(l, j), g0(l, j)));
      for (const auto& qk : c.q) add_gain_minorant(prog, ig, poff(j), N, qk, v0[uj]);
      for (int k = 0; k < 4; ++k) prog.add_lower_bound(var(a, j, k), 0.0);
      row_e.push_back(ie);
      all_t.push_back(it);
      x[it] = ts(l, j);
      x[ie] = es(l, j);
      x[ig] = gs(l, j);
      x[iS] = Ss(l, j);
    }
    prog.add_linear_inequality(row_e, std::vector<double>(row_e.size(), 1.0), 1.0);
  }
  prog.add_linear_inequality(all_t, std::vector<double>(all_t.size(), 1.0), 1.0);
  for (int j = 0; j < J; ++j) {
    add_unit_disks(prog, poff(j), N);
    write_pattern(x, poff(j), vs[static_cast<std::size_t>(j)], N);
  }

  convex::Options opt;
  opt.gap_tolerance = 1e-11;
  res.start_surrogate = -kappa * prog.objective(x);
  const convex::Result r = convex::minimize(prog, x, opt);
  res.newton_steps = r.newton_steps;
  if (!r.converged) throw SolverError("dynamic subproblem: barrier method did not converge");
  // The volume grows with S, so lift each slack onto its bound; the barrier leaves it
  // slightly inside, most visibly on short slots where its multiplier is small.
  RVector xs = r.x;
  for (int a = 0; a < A; ++a) {
    const int l = active[static_cast<std::size_t>(a)];
    for (int j = 0; j < J; ++j) {
      const double bound = bilinear_minorant(xs[var(a, j, 1)], xs[var(a, j, 2)], e0(l, j), g0(l, j));
      xs[var(a, j, 3)] = std::max(xs[var(a, j, 3)], bound);
    }
  }
  res.surrogate = -kappa * prog.objective(xs);

  DynamicState& out = res.state;
  out.expansion.energies = RMatrix::Zero(L, J);
  out.expansion.gammas = RMatrix::Zero(L, J);
  out.expansion.patterns_relaxed = v0;
  out.times.setZero();
  out.energies.setZero();
  out.gammas.setZero();
  out.slacks.setZero();
  for (int a = 0; a < A; ++a) {
    const int l = active[static_cast<std::size_t>(a)];
    const double s = clusters[static_cast<std::size_t>(l)].scale;
    for (int j = 0; j < J; ++j) {
      out.times(l, j) = config.frame_time * xs[var(a, j, 0)];
      out.energies(l, j) = config.energy_budget * xs[var(a, j, 1)];
      out.gammas(l, j) = s * xs[var(a, j, 2)];
      out.slacks(l, j) = config.energy_budget * s * xs[var(a, j, 3)];
      out.expansion.energies(l, j) = config.energy_budget * e0(l, j);
      out.expansion.gammas(l, j) = s * g0(l, j);
    }
  }
  out.patterns_relaxed.clear();
  for (int j = 0; j < J; ++j) out.patterns_relaxed.push_back(read_pattern(xs, poff(j), N));
  return res;
}

std::vector<double> standalone_rates(const SystemConfig& config, const ChannelSet& channels,
                                     const std::vector<BeamPattern>& dedicated) {
  std::vector<double> rates;
  for (int l = 0; l < config.clusters; ++l) {
    const double g = dedicated.empty() ? min_direct_gain(channels, l).value
                                       : min_gain(channels, l, dedicated.at(static_cast<std::size_t>(l))).value;
    const double snr = config.energy_budget * g / (config.frame_time * config.noise(l));
    rates.push_back(computation_rate(snr, config.quantization_bits, config.rate_devices));
  }
  return rates;
}

std::vector<int> rank_clusters(const std::vector<double>& rates) {
  std::vector<int> order(rates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rates[static_cast<std::size_t>(a)] > rates[static_cast<std::size_t>(b)];
  });
  return order;
}

namespace {

DynamicState blend_states(const SystemConfig& config, const ChannelSet& channels, const DynamicState& from,
                          const DynamicState& to, double beta) {
  DynamicState s = to;
  s.times = from.times + beta * (to.times - from.times);
  s.energies = from.energies + beta * (to.energies - from.energies);
  for (std::size_t j = 0; j < s.patterns_relaxed.size(); ++j) {
    s.patterns_relaxed[j] = from.patterns_relaxed[j] + beta * (to.patterns_relaxed[j] - from.patterns_relaxed[j]);
  }
  for (int l = 0; l < config.clusters; ++l) {
    const auto q = lifted_channels(channels, l);
    for (int j = 0; j < s.slots(); ++j) {
      s.gammas(l, j) = min_relaxed_gain(s.patterns_relaxed[static_cast<std::size_t>(j)], q);
      s.slacks(l, j) = s.energies(l, j) * s.gammas(l, j);
    }
  }
  return s;
}

}  // namespace

Solution solve_dynamic(const SystemConfig& config, const ChannelSet& channels, int J,
                       const std::optional<Solution>& init, const DynamicOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  if (J < 1 || J > config.clusters) throw ConfigError("J must satisfy 1 <= J <= L");

  Diagnostics diag;
  DynamicState state;
  if (init) {
    if (static_cast<int>(init->patterns.size()) != J) throw std::invalid_argument("solve_dynamic: init must carry J patterns");
    state = dynamic_state_from_solution(config, channels, *init);
  } else {
    const Solution stage1 = solve_adaptive_decomposed(config, channels);
    merge_flags(diag, stage1.diagnostics);
    diag.outer_iterations = stage1.diagnostics.outer_iterations;
    const auto order = rank_clusters(standalone_rates(config, channels, stage1.patterns));
    std::vector<BeamPattern> patterns;
    for (int j = 0; j < J; ++j) patterns.push_back(stage1.patterns[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    state = initial_dynamic_state(config, channels, patterns);
  }

  Solution best = polish_patterns(config, channels, state.patterns_relaxed, "dynamic");
  double current = relaxed_objective(config, channels, state);
  diag.objective_trace.push_back(current);
  diag.trace_round.push_back(0);

  for (int it = 0; it < options.max_iterations; ++it) {
    DynamicStepResult step = dynamic_subproblem(channels, config, state);
    ++diag.iterations;
    double next = relaxed_objective(config, channels, step.state);
    int blends = 0;
    while (next < current - 1e-8 && blends < options.max_blends) {
      step.state = blend_states(config, channels, state, step.state, options.blend);
      next = relaxed_objective(config, channels, step.state);
      ++blends;
    }
    if (next < current - 1e-8) {
      add_flag(diag, "nonmonotone_step");
      break;
    }
    if (blends > 0) add_flag(diag, "blended_step");
    const double gain = (next - current) / std::max(std::abs(current), 1e-300);
    state = std::move(step.state);
    current = next;
    diag.objective_trace.push_back(current);
    diag.trace_round.push_back(0);

    Solution cand = polish_patterns(config, channels, state.patterns_relaxed, "dynamic");
    if (cand.objective > best.objective) best = std::move(cand);
    if (gain < options.tolerance) break;
  }

  Solution relaxed;
  relaxed.allocation = Allocation{state.times, state.energies};
  diag.split_fraction = extract_association(relaxed, config.frame_time).split_fraction;
  diag.relaxed_objective = current;
  diag.wallclock_s = seconds_since(start);
  best.diagnostics = std::move(diag);
  return best;
}

namespace {

// Stage 3: shared pattern of `group` plus all times, energies fixed at E_max.
struct SharedPatternResult {
  CVector vbar;
  int iterations = 0;
  std::vector<double> trace;
  bool nonmonotone = false;
};

SharedPatternResult optimize_shared_pattern(const SystemConfig& config, const ChannelSet& channels,
                                            const std::vector<BeamPattern>& patterns, const std::vector<int>& assignment,
                                            int shared, const CVector& start, const DynamicOptions& options,
                                            Solution& best, const std::string& algorithm) {
  const int L = config.clusters;
  const int N = channels.elements();
  const auto clusters = cluster_scales(config, channels);
  const double kappa = volume_scale(config);

  // Active clusters and their fixed normalized gains for dedicated slots.
  std::vector<int> active;
  std::vector<bool> in_group;
  for (int l = 0; l < L; ++l) {
    if (!clusters[static_cast<std::size_t>(l)].active) continue;
    active.push_back(l);
    in_group.push_back(assignment[static_cast<std::size_t>(l)] == shared);
  }
  const int A = static_cast<int>(active.size());

  auto objective_of = [&](const CVector& vbar, const std::vector<double>& t) {
    double total = 0.0;
    for (int a = 0; a < A; ++a) {
      const int l = active[static_cast<std::size_t>(a)];
      const auto ul = static_cast<std::size_t>(l);
      const double g = in_group[static_cast<std::size_t>(a)]
                           ? min_relaxed_gain(vbar, detail::lifted_channels(channels, l))
                           : min_gain(channels, l, patterns[static_cast<std::size_t>(assignment[ul])]).value;
      total += config.weight(l) * volume_term(t[static_cast<std::size_t>(a)] * config.frame_time,
                                              config.energy_budget * g, config.noise(l), config.quantization_bits,
                                              config.rate_devices);
    }
    return total;
  };
  auto times_for = [&](const CVector& vbar) {
    std::vector<double> c, w;
    for (int a = 0; a < A; ++a) {
      const int l = active[static_cast<std::size_t>(a)];
      const auto ul = static_cast<std::size_t>(l);
      const auto& cl = clusters[ul];
      const double g = in_group[static_cast<std::size_t>(a)]
                           ? min_relaxed_gain(vbar, cl.q)
                           : min_gain(channels, l, patterns[static_cast<std::size_t>(assignment[ul])]).value / cl.scale;
      c.push_back(std::exp(cl.log_c) * g);
      w.push_back(cl.weight);
    }
    return optimal_time_allocation(w, c, 1.0);
  };

  SharedPatternResult res;
  res.vbar = start;
  if (A == 0) return res;
  std::vector<double> t = times_for(start);
  double current = objective_of(start, t);
  res.trace.push_back(current);

  for (int it = 0; it < options.max_iterations; ++it) {
    CVector v0 = res.vbar;
    CVector vs = push_pattern(v0);
    std::vector<double> ts = t;
    push_simplex(ts);

    // Variables: t per active cluster, gamma per group member, then the pattern.
    std::vector<int> gamma_var(static_cast<std::size_t>(A), -1);
    int n = A;
    for (int a = 0; a < A; ++a) {
      if (in_group[static_cast<std::size_t>(a)]) gamma_var[static_cast<std::size_t>(a)] = n++;
    }
    const int off = n;
    n += 2 * N;
    convex::Program prog(n);
    RVector x(n);
    std::vector<int> tv;
    for (int a = 0; a < A; ++a) {
      const int l = active[static_cast<std::size_t>(a)];
      const auto& cl = clusters[static_cast<std::size_t>(l)];
      tv.push_back(a);
      x[a] = ts[static_cast<std::size_t>(a)];
      prog.add_lower_bound(a, 0.0);
      const int gv = gamma_var[static_cast<std::size_t>(a)];
      if (gv >= 0) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& qk : cl.q) {
          const cplx z0 = v0.dot(qk);
          lo = std::min(lo, 2.0 * std::real(std::conj(z0) * vs.dot(qk)) - std::norm(z0));
          add_gain_minorant(prog, gv, off, N, qk, v0);
        }
        x[gv] = kShrink * lo;
        if (!(x[gv] > 0.0)) throw SolverError("shared pattern step: no strictly feasible start (zero gain)");
        prog.add_lower_bound(gv, 0.0);
        prog.add_objective({a, gv}, detail::negative_volume(cl.weight, cl.log_c));
      } else {
        const double g = min_gain(channels, l, patterns[static_cast<std::size_t>(assignment[static_cast<std::size_t>(l)])]).value /
                         cl.scale;
        const double lc = cl.log_c + std::log(g);
        const double w = cl.weight;
        prog.add_objective({a}, [w, lc](const RVector& y, convex::LocalEval& out, bool derivatives) {
          if (!(y[0] > 0.0)) return false;
          out.value = w * y[0] * (std::log(y[0]) - lc);
          if (derivatives) {
            out.gradient = RVector::Constant(1, w * (std::log(y[0]) + 1.0 - lc));
            out.hessian = RMatrix::Constant(1, 1, w / y[0]);
          }
          return true;
        });
      }
    }
    prog.add_linear_inequality(tv, std::vector<double>(tv.size(), 1.0), 1.0);
    add_unit_disks(prog, off, N);
    write_pattern(x, off, vs, N);

    convex::Options opt;
    opt.gap_tolerance = 1e-11;
    const convex::Result r = convex::minimize(prog, x, opt);
    if (!r.converged) throw SolverError("shared pattern step: barrier method did not converge");
    ++res.iterations;
    (void)kappa;

    CVector vnew = read_pattern(r.x, off, N);
    std::vector<double> tnew(r.x.data(), r.x.data() + A);
    double next = objective_of(vnew, tnew);
    for (int b = 0; b < options.max_blends && next < current - 1e-8; ++b) {
      vnew = res.vbar + options.blend * (vnew - res.vbar);
      for (int a = 0; a < A; ++a) {
        tnew[static_cast<std::size_t>(a)] = t[static_cast<std::size_t>(a)] +
                                            options.blend * (tnew[static_cast<std::size_t>(a)] - t[static_cast<std::size_t>(a)]);
      }
      next = objective_of(vnew, tnew);
    }
    if (next < current - 1e-8) {
      res.nonmonotone = true;
      break;
    }
    const double gain = (next - current) / std::max(std::abs(current), 1e-300);
    res.vbar = vnew;
    t = tnew;
    current = next;
    res.trace.push_back(current);

    std::vector<BeamPattern> cand_patterns = patterns;
    cand_patterns[static_cast<std::size_t>(shared)] = project_unit_modulus(vnew.head(N));
    Solution cand = allocate_single_slot(config, channels, std::move(cand_patterns), assignment, algorithm);
    if (cand.objective > best.objective) best = std::move(cand);
    if (gain < options.tolerance) break;
  }
  return res;
}

}  // namespace

Solution solve_low_complexity(const SystemConfig& config, const ChannelSet& channels, int J,
                              const DynamicOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  const int L = config.clusters;
  if (J < 1 || J > L) throw ConfigError("J must satisfy 1 <= J <= L");
  const std::string algorithm = "low_complexity";

  Solution stage1 = solve_adaptive_decomposed(config, channels);
  Diagnostics diag;
  merge_flags(diag, stage1.diagnostics);
  diag.iterations = stage1.diagnostics.iterations;
  diag.outer_iterations = stage1.diagnostics.outer_iterations;
  diag.penalty_residual = stage1.diagnostics.penalty_residual;

  const auto order = rank_clusters(standalone_rates(config, channels, stage1.patterns));
  std::vector<BeamPattern> patterns;
  std::vector<int> assignment(static_cast<std::size_t>(L));
  for (int r = 0; r < L; ++r) {
    const int l = order[static_cast<std::size_t>(r)];
    assignment[static_cast<std::size_t>(l)] = std::min(r, J - 1);
    if (r < J) patterns.push_back(stage1.patterns[static_cast<std::size_t>(l)]);
  }

  std::vector<int> group(order.begin() + (J - 1), order.end());
  Solution best = allocate_single_slot(config, channels, patterns, assignment, algorithm);
  if (group.size() > 1) {
    // Shared-pattern start: the group member's dedicated pattern that serves the group best.
    for (int l : group) {
      std::vector<BeamPattern> cand_patterns = patterns;
      cand_patterns[static_cast<std::size_t>(J - 1)] = stage1.patterns[static_cast<std::size_t>(l)];
      Solution cand = allocate_single_slot(config, channels, std::move(cand_patterns), assignment, algorithm);
      if (cand.objective > best.objective) best = std::move(cand);
    }
    patterns = best.patterns;
    const CVector start_vbar = lift_pattern(patterns[static_cast<std::size_t>(J - 1)].v);
    const SharedPatternResult shared =
        optimize_shared_pattern(config, channels, patterns, assignment, J - 1, start_vbar, options, best, algorithm);
    diag.iterations += shared.iterations;
    diag.objective_trace = shared.trace;
    diag.trace_round.assign(shared.trace.size(), 0);
    if (!shared.trace.empty()) diag.relaxed_objective = shared.trace.back();
    if (shared.nonmonotone) add_flag(diag, "nonmonotone_step");
  }
  diag.wallclock_s = seconds_since(start);
  best.diagnostics = std::move(diag);
  return best;
}

}  // namespace aircomp
