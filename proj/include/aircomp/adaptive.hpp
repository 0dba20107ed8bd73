#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "aircomp/rate.hpp"

// Cluster-adaptive beamforming: one dedicated IRS pattern per cluster, solved by
// matrix lifting and a rank-one penalty in difference-of-convex form.
namespace aircomp {

// Unit principal eigenvector of a Hermitian matrix. Within a degenerate top
// eigenspace the candidate with the lexicographically largest real part wins,
// after each candidate is rotated so its first nonzero entry is real positive.
CVector principal_eigenvector(const CMatrix& V);

// Tr((I - u u^H) V) with u the principal eigenvector of V_exp. Upper-bounds
// Tr(V) - ||V||_2 for PSD V, with equality at V = V_exp.
double spectral_majorizer(const CMatrix& V, const CMatrix& V_exp);

// (Tr V - ||V||_2) / Tr V
double penalty_residual(const CMatrix& V);

struct ExtractedPattern {
  BeamPattern pattern;
  double residual = 0.0;
};

// Rank-one recovery: principal eigenvector scaled by sqrt(lambda_max), rotated so the
// last coordinate is real positive, last coordinate dropped, entries projected to
// unit modulus.
ExtractedPattern extract_pattern(const LiftedPattern& lifted);

struct PenaltyState {
  std::vector<LiftedPattern> V;
  std::vector<double> gamma;       // Gamma_l, physical gain units
  std::vector<double> times;       // t_l [s]
  double rho = std::numeric_limits<double>::infinity();  // penalty factor; +inf drops the penalty
  std::vector<CVector> expansion;  // principal eigenvectors of the previous iterate

  double penalty_weight() const { return std::isfinite(rho) ? 0.5 / rho : 0.0; }
};

struct PenaltySubproblemResult {
  PenaltyState state;
  double surrogate = 0.0;   // linearized-penalty objective at the returned point
  double penalized = 0.0;   // exact penalized objective at the returned point
  double volume = 0.0;      // sum_l w_l t_l r_l without any penalty
  double dual_bound = 0.0;  // certified upper bound on the subproblem optimum
  int newton_steps = 0;
};

// Volume sum_l w_l t_l r_l of a lifted state (Gamma used as the min gain).
double lifted_volume(const SystemConfig& config, const std::vector<double>& gamma, const std::vector<double>& times);

// Exact penalized objective: volume - (1/2 rho) sum_l (Tr V_l - ||V_l||_2).
double penalized_objective(const SystemConfig& config, const PenaltyState& state);

// Rank-one start: each pattern phase-aligned with its cluster's weakest device,
// equal time split, Gamma from the true minimum gains, no penalty.
PenaltyState initial_penalty_state(const SystemConfig& config, const ChannelSet& channels);

// One convex step: maximize volume minus the linearized penalty over
// {V_l PSD, diag(V_l) = 1, Tr(V_l Q_lk) >= Gamma_l, t >= 0, sum t <= T_t}.
// Solved through its Lagrange dual (one small LMI per cluster) by a barrier method;
// the primal point is read off the central path and polished to exact feasibility.
PenaltySubproblemResult penalty_subproblem(const ChannelSet& channels, const SystemConfig& config,
                                           const PenaltyState& state);

struct AdaptiveOptions {
  double rho_decrease = 0.5;
  int max_outer = 20;
  int max_inner = 30;
  double inner_tolerance = 1e-4;
  double residual_target = 1e-7;
  double initial_penalty_share = 0.1;
};

Solution solve_cluster_adaptive(const SystemConfig& config, const ChannelSet& channels,
                                const AdaptiveOptions& options = {});

// Each cluster's max-min gain problem solved on its own, then optimal time split.
Solution solve_adaptive_decomposed(const SystemConfig& config, const ChannelSet& channels,
                                   const AdaptiveOptions& options = {});

struct UpperBound {
  double value = 0.0;           // certified dual bound on the rank-relaxed optimum
  double relaxed_primal = 0.0;  // feasible relaxed objective (value - gap)
  std::vector<double> gamma;
  std::vector<double> times;
  int newton_steps = 0;
  double wallclock_s = 0.0;
};

// Rank constraint dropped entirely; no pattern extraction.
UpperBound solve_upper_bound(const SystemConfig& config, const ChannelSet& channels);

}  // namespace aircomp
