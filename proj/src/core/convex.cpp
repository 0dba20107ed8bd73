#include "aircomp/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace aircomp::convex {

Program::Program(int num_variables) : n_(num_variables), linear_objective_(RVector::Zero(num_variables)) {
  if (num_variables <= 0) throw std::invalid_argument("convex program needs at least one variable");
}

double Program::complexity() const {
  double m = static_cast<double>(linear_.size() + inequalities_.size());
  for (const auto& b : barriers_) m += b.complexity;
  return m;
}

void Program::add_linear_objective(int var, double coef) { linear_objective_[var] += coef; }

void Program::add_objective(std::vector<int> vars, LocalFunction f) {
  objective_terms_.push_back(Smooth{std::move(vars), std::move(f), 0.0});
}

void Program::add_linear_inequality(std::vector<int> vars, std::vector<double> coefs, double rhs) {
  if (vars.size() != coefs.size()) throw std::invalid_argument("linear inequality size mismatch");
  linear_.push_back(Linear{std::move(vars), std::move(coefs), rhs});
}

void Program::add_lower_bound(int var, double bound) { add_linear_inequality({var}, {-1.0}, -bound); }

void Program::add_inequality(std::vector<int> vars, LocalFunction g) {
  inequalities_.push_back(Smooth{std::move(vars), std::move(g), 1.0});
}

void Program::add_barrier(std::vector<int> vars, LocalFunction b, double complexity) {
  barriers_.push_back(Smooth{std::move(vars), std::move(b), complexity});
}

namespace {

void gather(const std::vector<int>& vars, const RVector& x, RVector& out) {
  out.resize(static_cast<Eigen::Index>(vars.size()));
  for (std::size_t i = 0; i < vars.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[vars[i]];
}

double linear_slack(const std::vector<int>& vars, const std::vector<double>& coefs, double rhs, const RVector& x) {
  double ax = 0.0;
  for (std::size_t i = 0; i < vars.size(); ++i) ax += coefs[i] * x[vars[i]];
  return rhs - ax;
}

}  // namespace

double Program::objective(const RVector& x) const {
  double f = linear_objective_.dot(x);
  RVector local;
  LocalEval ev;
  for (const auto& t : objective_terms_) {
    gather(t.vars, x, local);
    if (!t.f(local, ev, false)) return std::numeric_limits<double>::quiet_NaN();
    f += ev.value;
  }
  return f;
}

bool Program::strictly_feasible(const RVector& x) const {
  if (x.size() != n_ || !x.allFinite()) return false;
  for (const auto& r : linear_) {
    if (!(linear_slack(r.vars, r.coefs, r.rhs, x) > 0.0)) return false;
  }
  RVector local;
  LocalEval ev;
  for (const auto& g : inequalities_) {
    gather(g.vars, x, local);
    if (!g.f(local, ev, false) || !(ev.value < 0.0)) return false;
  }
  for (const auto& b : barriers_) {
    gather(b.vars, x, local);
    if (!b.f(local, ev, false) || !std::isfinite(ev.value)) return false;
  }
  for (const auto& t : objective_terms_) {
    gather(t.vars, x, local);
    if (!t.f(local, ev, false) || !std::isfinite(ev.value)) return false;
  }
  return true;
}

class Engine {
 public:
  Engine(const Program& p, const Options& o) : p_(p), opt_(o), n_(p.size()) { build_pattern(); }

  Result run(RVector x) {
    if (!p_.strictly_feasible(x)) throw SolverError("barrier method: start point is not strictly feasible");
    const double theta = std::max(1.0, p_.complexity());
    Result res;
    double tau = opt_.initial_tau > 0.0 ? opt_.initial_tau : initial_tau(x, theta);
    int steps = 0;
    while (true) {
      steps += center(x, tau, opt_.max_newton_steps - steps);
      const double f0 = p_.objective(x);
      const double gap = theta / tau;
      res.gap_bound = gap;
      res.tau = tau;
      if (gap <= opt_.gap_tolerance * std::max(1.0, std::abs(f0))) {
        res.converged = true;
        break;
      }
      if (steps >= opt_.max_newton_steps) break;
      tau *= opt_.tau_growth;
    }
    res.x = std::move(x);
    res.objective = p_.objective(res.x);
    res.newton_steps = steps;
    return res;
  }

 private:
  // F(x) = tau * f0(x) + barrier(x); returns +inf outside the domain.
  double evaluate(const RVector& x, double tau, bool derivatives, double objective_scale = 1.0) {
    double F = tau * objective_scale * p_.linear_objective_.dot(x);
    if (derivatives) {
      grad_ = tau * objective_scale * p_.linear_objective_;
      hess_.setZero();
    }
    const double inf = std::numeric_limits<double>::infinity();

    for (const auto& r : p_.linear_) {
      const double s = linear_slack(r.vars, r.coefs, r.rhs, x);
      if (!(s > 0.0)) return inf;
      F -= std::log(s);
      if (derivatives) {
        const double inv = 1.0 / s;
        for (std::size_t a = 0; a < r.vars.size(); ++a) {
          grad_[r.vars[a]] += r.coefs[a] * inv;
          for (std::size_t b = 0; b < r.vars.size(); ++b) {
            hess_(r.vars[a], r.vars[b]) += r.coefs[a] * r.coefs[b] * inv * inv;
          }
        }
      }
    }
    if (tau * objective_scale != 0.0) {
      for (const auto& t : p_.objective_terms_) {
        gather(t.vars, x, local_);
        if (!t.f(local_, ev_, derivatives) || !std::isfinite(ev_.value)) return inf;
        const double w = tau * objective_scale;
        F += w * ev_.value;
        if (derivatives) scatter(t.vars, w, ev_.gradient, w, ev_.hessian);
      }
    }
    for (const auto& g : p_.inequalities_) {
      gather(g.vars, x, local_);
      if (!g.f(local_, ev_, derivatives) || !(ev_.value < 0.0)) return inf;
      const double s = -ev_.value;
      F -= std::log(s);
      if (derivatives) {
        const double inv = 1.0 / s;
        scatter(g.vars, inv, ev_.gradient, inv, ev_.hessian);
        for (std::size_t a = 0; a < g.vars.size(); ++a) {
          for (std::size_t b = 0; b < g.vars.size(); ++b) {
            hess_(g.vars[a], g.vars[b]) +=
                ev_.gradient[static_cast<Eigen::Index>(a)] * ev_.gradient[static_cast<Eigen::Index>(b)] * inv * inv;
          }
        }
      }
    }
    for (const auto& b : p_.barriers_) {
      gather(b.vars, x, local_);
      if (!b.f(local_, ev_, derivatives) || !std::isfinite(ev_.value)) return inf;
      F += ev_.value;
      if (derivatives) scatter(b.vars, 1.0, ev_.gradient, 1.0, ev_.hessian);
    }
    return F;
  }

  void scatter(const std::vector<int>& vars, double gw, const RVector& g, double hw, const RMatrix& h) {
    for (std::size_t a = 0; a < vars.size(); ++a) {
      grad_[vars[a]] += gw * g[static_cast<Eigen::Index>(a)];
      for (std::size_t b = 0; b < vars.size(); ++b) {
        hess_(vars[a], vars[b]) += hw * h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
  }

  void build_pattern() {
    grad_.resize(n_);
    hess_.resize(n_, n_);
    std::set<std::pair<int, int>> entries;  // (col, row) with row >= col
    auto clique = [&](const std::vector<int>& vars) {
      for (int a : vars) {
        for (int b : vars) {
          if (a >= b) entries.emplace(b, a);
        }
      }
    };
    for (int i = 0; i < n_; ++i) entries.emplace(i, i);
    for (const auto& t : p_.objective_terms_) clique(t.vars);
    for (const auto& r : p_.linear_) clique(r.vars);
    for (const auto& g : p_.inequalities_) clique(g.vars);
    for (const auto& b : p_.barriers_) clique(b.vars);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(entries.size());
    for (const auto& [c, r] : entries) trip.emplace_back(r, c, 1.0);
    sparse_.resize(n_, n_);
    sparse_.setFromTriplets(trip.begin(), trip.end());
    sparse_.makeCompressed();
    ldlt_.analyzePattern(sparse_);
  }

  // Solves H dx = -g with symmetric diagonal scaling. Returns false if H cannot be factored.
  bool newton_direction(RVector& dx) {
    RVector d(n_);
    for (int i = 0; i < n_; ++i) {
      const double h = hess_(i, i);
      d[i] = h > 0.0 && std::isfinite(h) ? 1.0 / std::sqrt(h) : 1.0;
    }
    for (double shift : {0.0, 1e-12, 1e-9, 1e-6}) {
      for (int c = 0; c < n_; ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sparse_, c); it; ++it) {
          const auto r = static_cast<int>(it.row());
          it.valueRef() = d[r] * hess_(r, c) * d[c] + (r == c ? shift : 0.0);
        }
      }
      ldlt_.factorize(sparse_);
      if (ldlt_.info() != Eigen::Success) continue;
      const RVector rhs = -(d.array() * grad_.array()).matrix();
      RVector y = ldlt_.solve(rhs);
      if (ldlt_.info() != Eigen::Success || !y.allFinite()) continue;
      dx = (d.array() * y.array()).matrix();
      return true;
    }
    return false;
  }

  int center(RVector& x, double tau, int budget) {
    int steps = 0;
    RVector dx;
    RVector trial(n_);
    for (int it = 0; it < opt_.max_centering_steps && steps < budget; ++it) {
      const double F = evaluate(x, tau, true);
      if (!std::isfinite(F)) throw SolverError("barrier method: iterate left the domain");
      if (!newton_direction(dx)) throw SolverError("barrier method: Newton system could not be factored");
      ++steps;
      const double slope = grad_.dot(dx);
      const double decrement = -slope;
      if (!(decrement >= 0.0) || decrement * 0.5 <= opt_.centering_tolerance) break;
      // Below this the Armijo test only sees rounding noise in F.
      if (decrement <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(F))) break;

      double s = 1.0;
      for (const auto& r : p_.linear_) {
        double adx = 0.0;
        for (std::size_t a = 0; a < r.vars.size(); ++a) adx += r.coefs[a] * dx[r.vars[a]];
        if (adx > 0.0) s = std::min(s, 0.99 * linear_slack(r.vars, r.coefs, r.rhs, x) / adx);
      }
      bool moved = false;
      while (s > 1e-14) {
        trial = x + s * dx;
        const double Ft = evaluate(trial, tau, false);
        if (std::isfinite(Ft) && Ft <= F + 0.01 * s * slope) {
          x.swap(trial);
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
    }
    return steps;
  }

  double initial_tau(const RVector& x, double theta) {
    const double f0 = p_.objective(x);
    // Barrier-only derivatives, then the objective gradient separately.
    evaluate(x, 0.0, true);
    const RVector gb = grad_;
    RVector z;
    const RMatrix hb = hess_;
    evaluate(x, 1.0, true);
    RVector g0 = grad_ - gb;
    hess_ = hb;
    grad_ = g0;
    double tau = 0.0;
    if (g0.squaredNorm() > 0.0 && newton_direction(z)) {
      // z = -Hb^{-1} g0; minimize || tau g0 + gb ||_{Hb^{-1}}
      const double num = gb.dot(z);
      const double den = -g0.dot(z);
      if (den > 0.0) tau = num / den;
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) tau = theta / std::max(1.0, std::abs(f0));
    return std::clamp(tau, 1e-8, 1e8);
  }

  const Program& p_;
  Options opt_;
  int n_;
  RVector grad_;
  RMatrix hess_;
  RVector local_;
  LocalEval ev_;
  Eigen::SparseMatrix<double> sparse_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
};

Result minimize(const Program& program, RVector start, const Options& options) {
  Engine engine(program, options);
  return engine.run(std::move(start));
}

}  // namespace aircomp::convex
