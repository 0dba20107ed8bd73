#pragma once

#include <functional>
#include <vector>

#include "aircomp/types.hpp"

// Path-following barrier method for smooth convex programs
//
//   minimize   c^T x + sum_i f_i(x)
//   subject to a_r^T x <= b_r,  g_s(x) <= 0,  x in dom(B_b)
//
// where every f_i, g_s and self-concordant barrier B_b depends on a small
// subset of the variables. Newton systems are assembled in sparse form over
// the union of those subsets and factored with a simplicial LDL^T.
namespace aircomp::convex {

struct LocalEval {
  double value = 0.0;
  RVector gradient;
  RMatrix hessian;
};

// Evaluates a function of the gathered local variables. Must return false when the
// point lies outside the function's domain. Gradient and Hessian are only required
// when `derivatives` is true and must then be sized to x.size().
using LocalFunction = std::function<bool(const RVector& x, LocalEval& out, bool derivatives)>;

class Program {
 public:
  explicit Program(int num_variables);

  int size() const { return n_; }
  // Barrier parameter: one per scalar inequality plus the declared barrier complexities.
  double complexity() const;

  void add_linear_objective(int var, double coef);
  void add_objective(std::vector<int> vars, LocalFunction f);
  void add_linear_inequality(std::vector<int> vars, std::vector<double> coefs, double rhs);
  void add_lower_bound(int var, double bound);
  void add_inequality(std::vector<int> vars, LocalFunction g);
  void add_barrier(std::vector<int> vars, LocalFunction b, double complexity);

  double objective(const RVector& x) const;
  bool strictly_feasible(const RVector& x) const;

 private:
  friend class Engine;

  struct Smooth {
    std::vector<int> vars;
    LocalFunction f;
    double complexity = 1.0;
  };
  struct Linear {
    std::vector<int> vars;
    std::vector<double> coefs;
    double rhs = 0.0;
  };

  int n_;
  RVector linear_objective_;
  std::vector<Smooth> objective_terms_;
  std::vector<Linear> linear_;
  std::vector<Smooth> inequalities_;
  std::vector<Smooth> barriers_;
};

struct Options {
  // Stop once complexity / tau <= gap_tolerance * max(1, |objective|).
  double gap_tolerance = 1e-10;
  double tau_growth = 20.0;
  // <= 0 selects tau by least-squares centering at the start point.
  double initial_tau = 0.0;
  int max_newton_steps = 4000;
  int max_centering_steps = 200;
  double centering_tolerance = 1e-10;
};

struct Result {
  RVector x;
  double objective = 0.0;
  double gap_bound = 0.0;
  double tau = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

// Throws SolverError when `start` is not strictly feasible.
Result minimize(const Program& program, RVector start, const Options& options = {});

}  // namespace aircomp::convex
