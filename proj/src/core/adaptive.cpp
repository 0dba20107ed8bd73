#include "aircomp/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "aircomp/convex.hpp"
#include "lifted.hpp"

namespace aircomp {

namespace {

using detail::bottleneck_scale;
using detail::lifted_channels;
using detail::volume_scale;

void rotate_first_nonzero_real(CVector& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (a > 1e-12) {
      u *= std::conj(u[i]) / a;
      return;
    }
  }
}

bool lexicographically_greater(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a[i].real() - b[i].real();
    if (std::abs(d) > 1e-12) return d > 0.0;
  }
  return false;
}

void require_hermitian(const CMatrix& V, const char* who) {
  if (V.rows() != V.cols()) throw std::invalid_argument(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
  if ((V - V.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
  }
}

double min_lifted_gain(const CMatrix& V, const std::vector<CVector>& q) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& qk : q) g = std::min(g, std::max(0.0, (qk.adjoint() * V * qk)(0, 0).real()));
  return g;
}

CMatrix normalize_diagonal(const CMatrix& V) {
  const Eigen::Index n = V.rows();
  RVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(std::max(V(i, i).real(), 1e-300));
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = d[i] * V(i, j) * d[j];
  }
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = 1.0;
  return 0.5 * (out + out.adjoint());
}

struct ClusterBlock {
  int cluster = 0;
  std::vector<CVector> q;  // lifted channels divided by sqrt(scale)
  double scale = 1.0;      // gain normalization s_l
  double log_c = 0.0;      // ln(E s_l / (T sigma_l^2))
  double weight = 1.0;
  CVector expansion;
  int y_offset = 0;
  int mu_offset = 0;
};

// -log det(Diag(y) - beta u u^H - sum_k mu_k q_k q_k^H) over local variables [y, mu].
convex::LocalFunction log_det_barrier(const ClusterBlock& block, double beta) {
  const auto n = static_cast<Eigen::Index>(block.q.front().size());
  const auto K = static_cast<Eigen::Index>(block.q.size());
  CMatrix Qstack(n, K);
  for (Eigen::Index k = 0; k < K; ++k) Qstack.col(k) = block.q[static_cast<std::size_t>(k)];
  const CMatrix base = -beta * block.expansion * block.expansion.adjoint();
  return [n, K, Qstack, base](const RVector& x, convex::LocalEval& out, bool derivatives) {
    CMatrix S = base;
    for (Eigen::Index i = 0; i < n; ++i) S(i, i) += x[i];
    for (Eigen::Index k = 0; k < K; ++k) {
      const double mu = x[n + k];
      S.noalias() -= mu * Qstack.col(k) * Qstack.col(k).adjoint();
    }
    Eigen::LLT<CMatrix> llt(S);
    if (llt.info() != Eigen::Success) return false;
    const CMatrix& Lm = llt.matrixLLT();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = Lm(i, i).real();
      if (!(d > 0.0)) return false;
      logdet += 2.0 * std::log(d);
    }
    out.value = -logdet;
    if (!derivatives) return true;

    CMatrix W = llt.solve(CMatrix::Identity(n, n));
    W = 0.5 * (W + W.adjoint()).eval();
    const CMatrix WQ = W * Qstack;
    out.gradient.resize(n + K);
    out.hessian.resize(n + K, n + K);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.gradient[i] = -W(i, i).real();
      for (Eigen::Index j = 0; j < n; ++j) out.hessian(i, j) = std::norm(W(i, j));
    }
    const CMatrix QWQ = Qstack.adjoint() * WQ;
    for (Eigen::Index k = 0; k < K; ++k) {
      out.gradient[n + k] = QWQ(k, k).real();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = -std::norm(WQ(i, k));
        out.hessian(i, n + k) = h;
        out.hessian(n + k, i) = h;
      }
      for (Eigen::Index k2 = 0; k2 < K; ++k2) out.hessian(n + k, n + k2) = std::norm(QWQ(k, k2));
    }
    return true;
  };
}

// w (ln(C w) - ln(sum mu) - 1) - nu <= 0 over local variables [mu, nu].
convex::LocalFunction conjugate_constraint(const ClusterBlock& block) {
  const auto K = static_cast<Eigen::Index>(block.q.size());
  const double w = block.weight;
  const double shift = w * (block.log_c + std::log(w) - 1.0);
  return [K, w, shift](const RVector& x, convex::LocalEval& out, bool derivatives) {
    const double m = x.head(K).sum();
    if (!(m > 0.0)) return false;
    out.value = shift - w * std::log(m) - x[K];
    if (derivatives) {
      out.gradient.resize(K + 1);
      out.gradient.head(K).setConstant(-w / m);
      out.gradient[K] = -1.0;
      out.hessian = RMatrix::Zero(K + 1, K + 1);
      out.hessian.topLeftCorner(K, K).setConstant(w / (m * m));
    }
    return true;
  };
}

}  // namespace

CVector principal_eigenvector(const CMatrix& V) {
  require_hermitian(V, "principal_eigenvector");
  const CMatrix H = 0.5 * (V + V.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) throw SolverError("principal_eigenvector: eigen decomposition failed");
  const Eigen::Index n = H.rows();
  const RVector& lambda = es.eigenvalues();
  const double top = lambda[n - 1];
  const double tol = 1e-9 * std::max(1.0, std::abs(top));
  CVector best = es.eigenvectors().col(n - 1);
  rotate_first_nonzero_real(best);
  for (Eigen::Index i = n - 2; i >= 0 && lambda[i] >= top - tol; --i) {
    CVector cand = es.eigenvectors().col(i);
    rotate_first_nonzero_real(cand);
    if (lexicographically_greater(cand, best)) best = cand;
  }
  return best.normalized();
}

double spectral_majorizer(const CMatrix& V, const CMatrix& V_exp) {
  require_hermitian(V, "spectral_majorizer");
  require_hermitian(V_exp, "spectral_majorizer");
  if (V.rows() != V_exp.rows()) throw std::invalid_argument("spectral_majorizer: dimension mismatch");
  const CVector u = principal_eigenvector(V_exp);
  return V.trace().real() - (u.adjoint() * V * u)(0, 0).real();
}

double penalty_residual(const CMatrix& V) {
  const double tr = V.trace().real();
  if (!(tr > 0.0)) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (V + V.adjoint()), Eigen::EigenvaluesOnly);
  return std::max(0.0, (tr - es.eigenvalues()[V.rows() - 1]) / tr);
}

ExtractedPattern extract_pattern(const LiftedPattern& lifted) {
  const CMatrix& V = lifted.V;
  require_hermitian(V, "extract_pattern");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (V + V.adjoint()), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues()[V.rows() - 1];
  if (!(top > 0.0)) throw std::invalid_argument("extract_pattern: top eigenvalue is not positive");
  CVector w = principal_eigenvector(V) * std::sqrt(top);
  const Eigen::Index n = w.size() - 1;
  const cplx last = w[n];
  if (std::abs(last) > 1e-12) w *= std::conj(last) / std::abs(last);
  ExtractedPattern out;
  out.pattern.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(w[i]);
    out.pattern.v[i] = a > 0.0 ? w[i] / a : cplx(1.0, 0.0);
  }
  out.residual = penalty_residual(V);
  return out;
}

double lifted_volume(const SystemConfig& config, const std::vector<double>& gamma, const std::vector<double>& times) {
  double v = 0.0;
  for (int l = 0; l < config.clusters; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    v += config.weight(l) * volume_term(times[ul], config.energy_budget * gamma[ul], config.noise(l),
                                        config.quantization_bits, config.rate_devices);
  }
  return v;
}

double penalized_objective(const SystemConfig& config, const PenaltyState& state) {
  double pen = 0.0;
  for (const auto& V : state.V) pen += penalty_residual(V.V) * V.V.trace().real();
  return lifted_volume(config, state.gamma, state.times) - state.penalty_weight() * pen;
}

PenaltyState initial_penalty_state(const SystemConfig& config, const ChannelSet& channels) {
  PenaltyState s;
  const int N = channels.elements();
  for (int l = 0; l < config.clusters; ++l) {
    const auto q = lifted_channels(channels, l);
    int weakest = 0;
    bottleneck_scale(q, &weakest);
    const CVector& qw = q[static_cast<std::size_t>(weakest)];
    CVector vbar(N + 1);
    const double ref = std::arg(qw[N]);
    for (int i = 0; i <= N; ++i) vbar[i] = std::polar(1.0, std::arg(qw[i]) - ref);
    vbar[N] = 1.0;
    s.V.push_back(LiftedPattern{vbar * vbar.adjoint()});
    s.gamma.push_back(min_lifted_gain(s.V.back().V, q));
    s.times.push_back(config.frame_time / config.clusters);
    s.expansion.push_back(vbar.normalized());
  }
  return s;
}

PenaltySubproblemResult penalty_subproblem(const ChannelSet& channels, const SystemConfig& config,
                                           const PenaltyState& state) {
  const int L = config.clusters;
  const int n = channels.elements() + 1;
  if (static_cast<int>(state.V.size()) != L) throw std::invalid_argument("penalty_subproblem: state size mismatch");
  const double kappa = volume_scale(config);
  const double beta = state.penalty_weight();
  const double beta_n = beta / kappa;

  std::vector<ClusterBlock> blocks;
  int offset = 0;
  for (int l = 0; l < L; ++l) {
    auto q = lifted_channels(channels, l);
    const double s = bottleneck_scale(q);
    if (!(config.weight(l) > 0.0) || !(s > 0.0)) continue;
    ClusterBlock b;
    b.cluster = l;
    b.scale = s;
    for (auto& qk : q) qk /= std::sqrt(s);
    b.q = std::move(q);
    b.log_c = std::log(config.energy_budget * s / (config.frame_time * config.noise(l)));
    b.weight = config.weight(l);
    const auto ul = static_cast<std::size_t>(l);
    b.expansion = ul < state.expansion.size() && state.expansion[ul].size() == n
                      ? state.expansion[ul]
                      : principal_eigenvector(state.V[ul].V);
    b.y_offset = offset;
    offset += n;
    b.mu_offset = offset;
    offset += static_cast<int>(b.q.size());
    blocks.push_back(std::move(b));
  }

  PenaltySubproblemResult res;
  res.state = state;
  std::vector<CVector> expansion_used(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    expansion_used[ul] = ul < state.expansion.size() && state.expansion[ul].size() == n
                             ? state.expansion[ul]
                             : principal_eigenvector(state.V[ul].V);
  }

  double dual_normalized = 0.0;
  if (!blocks.empty()) {
    const int nu = offset;
    convex::Program prog(offset + 1);
    RVector x0(offset + 1);
    double nu0 = 0.0;
    for (const auto& b : blocks) {
      std::vector<int> lmi_vars;
      double ysum = beta_n + 1.0;
      for (const auto& qk : b.q) ysum += qk.squaredNorm();
      for (int i = 0; i < n; ++i) {
        prog.add_linear_objective(b.y_offset + i, 1.0);
        lmi_vars.push_back(b.y_offset + i);
        x0[b.y_offset + i] = ysum;
      }
      std::vector<int> conj_vars;
      for (std::size_t k = 0; k < b.q.size(); ++k) {
        const int var = b.mu_offset + static_cast<int>(k);
        lmi_vars.push_back(var);
        conj_vars.push_back(var);
        prog.add_lower_bound(var, 0.0);
        x0[var] = 1.0;
      }
      conj_vars.push_back(nu);
      prog.add_barrier(lmi_vars, log_det_barrier(b, beta_n), static_cast<double>(n));
      prog.add_inequality(conj_vars, conjugate_constraint(b));
      const double m0 = static_cast<double>(b.q.size());
      nu0 = std::max(nu0, b.weight * (b.log_c + std::log(b.weight / m0) - 1.0));
    }
    prog.add_linear_objective(nu, 1.0);
    prog.add_lower_bound(nu, 0.0);
    x0[nu] = std::max(nu0, 0.0) + 1.0;

    convex::Options opt;
    opt.gap_tolerance = 1e-11;
    const convex::Result r = convex::minimize(prog, x0, opt);
    res.newton_steps = r.newton_steps;
    if (!r.converged) throw SolverError("penalty subproblem: barrier method did not converge");
    dual_normalized = r.objective;

    for (const auto& b : blocks) {
      const auto ul = static_cast<std::size_t>(b.cluster);
      CMatrix S = -beta_n * b.expansion * b.expansion.adjoint();
      for (int i = 0; i < n; ++i) S(i, i) += r.x[b.y_offset + i];
      for (std::size_t k = 0; k < b.q.size(); ++k) {
        S.noalias() -= r.x[b.mu_offset + static_cast<int>(k)] * b.q[k] * b.q[k].adjoint();
      }
      Eigen::LLT<CMatrix> llt(S);
      const CMatrix W = llt.solve(CMatrix::Identity(n, n));
      res.state.V[ul].V = normalize_diagonal(0.5 * (W + W.adjoint()));
    }
  }

  // Polish: exact unit diagonal, Gamma = true min lifted gain, optimal time split.
  std::vector<double> c(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    res.state.gamma[ul] = min_lifted_gain(res.state.V[ul].V, lifted_channels(channels, l));
    c[ul] = config.energy_budget * res.state.gamma[ul] / config.noise(l);
  }
  res.state.times = optimal_time_allocation(config.weights, c, config.frame_time);
  res.state.expansion = expansion_used;

  res.volume = lifted_volume(config, res.state.gamma, res.state.times);
  double linearized = 0.0;
  for (int l = 0; l < L; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const CMatrix& V = res.state.V[ul].V;
    const CVector& u = expansion_used[ul];
    linearized += V.trace().real() - (u.adjoint() * V * u)(0, 0).real();
  }
  res.surrogate = res.volume - beta * linearized;
  res.penalized = penalized_objective(config, res.state);
  double constant = 0.0;
  for (const auto& b : blocks) {
    (void)b;
    constant += static_cast<double>(n);
  }
  res.dual_bound = blocks.empty() ? res.surrogate : kappa * dual_normalized - beta * constant;
  return res;
}

Solution solve_cluster_adaptive(const SystemConfig& config, const ChannelSet& channels,
                                const AdaptiveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  const int L = config.clusters;
  const int n = channels.elements() + 1;

  PenaltyState state = initial_penalty_state(config, channels);
  const double initial_volume = lifted_volume(config, state.gamma, state.times);
  const double scale = volume_scale(config);
  const double beta0 = options.initial_penalty_share * (initial_volume > 0.0 ? initial_volume : scale) /
                       (static_cast<double>(L) * n);
  state.rho = 0.5 / beta0;

  Diagnostics diag;
  double current = penalized_objective(config, state);
  double residual = 1.0;
  bool reached = false;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    diag.outer_iterations = outer + 1;
    diag.objective_trace.push_back(current);
    diag.trace_round.push_back(outer);
    for (int inner = 0; inner < options.max_inner; ++inner) {
      for (int l = 0; l < L; ++l) {
        state.expansion[static_cast<std::size_t>(l)] = principal_eigenvector(state.V[static_cast<std::size_t>(l)].V);
      }
      const PenaltySubproblemResult step = penalty_subproblem(channels, config, state);
      ++diag.iterations;
      if (step.penalized < current - 1e-8) {
        diag.flags.push_back("rejected_step");
        break;
      }
      const double gain = (step.penalized - current) / std::max(std::abs(current), 1e-300);
      state = step.state;
      current = step.penalized;
      diag.objective_trace.push_back(current);
      diag.trace_round.push_back(outer);
      if (gain < options.inner_tolerance) break;
    }
    residual = 0.0;
    for (const auto& V : state.V) residual = std::max(residual, penalty_residual(V.V));
    if (residual <= options.residual_target) {
      reached = true;
      break;
    }
    state.rho *= options.rho_decrease;
    current = penalized_objective(config, state);
  }
  if (!reached) diag.flags.push_back("penalty_residual_not_reached");
  diag.penalty_residual = residual;
  diag.relaxed_objective = lifted_volume(config, state.gamma, state.times);

  std::vector<BeamPattern> patterns;
  std::vector<int> assignment;
  for (int l = 0; l < L; ++l) {
    patterns.push_back(extract_pattern(state.V[static_cast<std::size_t>(l)]).pattern);
    assignment.push_back(l);
  }
  Solution sol = allocate_single_slot(config, channels, std::move(patterns), std::move(assignment), "cluster_adaptive");
  diag.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sol.diagnostics = std::move(diag);
  return sol;
}

Solution solve_adaptive_decomposed(const SystemConfig& config, const ChannelSet& channels,
                                   const AdaptiveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  const int L = config.clusters;
  std::vector<BeamPattern> patterns;
  std::vector<int> assignment;
  Diagnostics diag;
  for (int l = 0; l < L; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    SystemConfig sub = config;
    sub.clusters = 1;
    sub.pattern_budget = 1;
    sub.devices_per_cluster = {config.devices(l)};
    sub.noise_power = {config.noise(l)};
    sub.weights = {config.weight(l)};
    sub.geometry.cluster_centers = {config.geometry.center_of(l)};
    ChannelSet ch;
    ch.irs_ap = channels.irs_ap;
    ch.direct = {channels.direct[ul]};
    ch.reflect = {channels.reflect[ul]};
    ch.device_positions = {ul < channels.device_positions.size() ? channels.device_positions[ul]
                                                                 : std::vector<Position>{}};
    const Solution part = solve_cluster_adaptive(sub, ch, options);
    patterns.push_back(part.patterns.front());
    assignment.push_back(l);
    diag.iterations += part.diagnostics.iterations;
    diag.outer_iterations = std::max(diag.outer_iterations, part.diagnostics.outer_iterations);
    diag.penalty_residual = std::max(diag.penalty_residual, part.diagnostics.penalty_residual);
    for (const auto& f : part.diagnostics.flags) {
      if (!diag.has_flag(f)) diag.flags.push_back(f);
    }
  }
  Solution sol = allocate_single_slot(config, channels, std::move(patterns), std::move(assignment), "adaptive_decomposed");
  diag.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sol.diagnostics = std::move(diag);
  return sol;
}

UpperBound solve_upper_bound(const SystemConfig& config, const ChannelSet& channels) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  channels.check_against(config);
  PenaltyState state = initial_penalty_state(config, channels);
  state.rho = std::numeric_limits<double>::infinity();
  const PenaltySubproblemResult r = penalty_subproblem(channels, config, state);
  UpperBound ub;
  ub.value = std::max(r.dual_bound, r.volume);
  ub.relaxed_primal = r.volume;
  ub.gamma = r.state.gamma;
  ub.times = r.state.times;
  ub.newton_steps = r.newton_steps;
  ub.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ub;
}

}  // namespace aircomp
