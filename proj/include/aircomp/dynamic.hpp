#pragma once

#include <optional>
#include <vector>

#include "aircomp/adaptive.hpp"

// Dynamic beamforming: J IRS patterns per frame shared by L clusters, solved by
// slack-variable successive convex approximation, plus the sorted-assignment
// low-complexity variant.
namespace aircomp {

// ((e0+g0)^2 + 2(e0+g0)(e+g-e0-g0) - (e^2+g^2)) / 2. Concave, equals e*g at
// (e0, g0) and never exceeds e*g.
double bilinear_minorant(double e, double gamma, double e_exp, double gamma_exp);

// 2 Re{v0^H Q v} - v0^H Q v0 <= v^H Q v. Throws std::invalid_argument when Q is not
// Hermitian PSD or dimensions disagree.
double quadratic_form_minorant(const CVector& vbar, const CVector& vbar_exp, const CMatrix& Q);

struct DynamicPoint {
  RMatrix energies;                        // L x J [J]
  RMatrix gammas;                          // L x J, physical gain units
  std::vector<CVector> patterns_relaxed;   // J vectors of length N+1, last entry 1
};

struct DynamicState {
  RMatrix times;     // L x J [s]
  RMatrix energies;  // L x J [J]
  RMatrix gammas;    // L x J
  RMatrix slacks;    // L x J, S = e * gamma at the optimum
  std::vector<CVector> patterns_relaxed;
  DynamicPoint expansion;  // point the minorants were built around

  int slots() const { return static_cast<int>(patterns_relaxed.size()); }
};

// Pattern-independent start: energies E/J, times T/(L J), gammas and slacks from the
// true gains of `patterns` (length-N unit-modulus or relaxed).
DynamicState initial_dynamic_state(const SystemConfig& config, const ChannelSet& channels,
                                   const std::vector<BeamPattern>& patterns);

// Warm start from an existing solution's patterns and allocation.
DynamicState dynamic_state_from_solution(const SystemConfig& config, const ChannelSet& channels,
                                         const Solution& solution);

// Objective of the relaxed point with gammas from the true gains and S = e * gamma.
double relaxed_objective(const SystemConfig& config, const ChannelSet& channels, const DynamicState& state);

struct DynamicStepResult {
  DynamicState state;
  double surrogate = 0.0;  // surrogate objective at the returned point, reported units
  double start_surrogate = 0.0;  // surrogate at the strictly feasible start point
  int newton_steps = 0;
};

// One convex step with both minorants built around `state`. Boundary points (unit
// modulus patterns, exhausted budgets) are pushed slightly into the interior before
// the barrier solve; if that makes the expansion infeasible, the pushed point
// becomes the expansion point.
DynamicStepResult dynamic_subproblem(const ChannelSet& channels, const SystemConfig& config,
                                     const DynamicState& state);

// Entry-wise phase projection; exact zeros map to 1.
BeamPattern project_unit_modulus(const CVector& v_relaxed);

struct Association {
  std::vector<int> pattern;  // -1 when inactive
  std::vector<bool> split;
  std::vector<bool> inactive;
  double split_fraction = 0.0;  // split clusters / active clusters
};

// argmax_j t_lj per cluster; entries below 1e-6 * T_t count as zero.
Association extract_association(const Solution& solution, double frame_time);

struct DynamicOptions {
  int max_iterations = 50;
  double tolerance = 1e-4;  // relative improvement of the relaxed objective
  double blend = 0.5;
  int max_blends = 5;
};

// Cold start: stage-1 patterns of the J clusters with the highest standalone rates.
Solution solve_dynamic(const SystemConfig& config, const ChannelSet& channels, int J,
                       const std::optional<Solution>& init = std::nullopt, const DynamicOptions& options = {});

// Rate of cluster l alone in the whole frame with full energy: rate(E Gamma / (T sigma^2)).
std::vector<double> standalone_rates(const SystemConfig& config, const ChannelSet& channels,
                                     const std::vector<BeamPattern>& dedicated);

// Clusters ordered by standalone rate, descending; ties to the lower index.
std::vector<int> rank_clusters(const std::vector<double>& rates);

Solution solve_low_complexity(const SystemConfig& config, const ChannelSet& channels, int J,
                              const DynamicOptions& options = {});

}  // namespace aircomp
