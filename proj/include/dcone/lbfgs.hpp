#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcone/common.hpp"

namespace dcone {

enum class SolveStatus { gradient_converged, stopped_on_target, max_iterations, line_search_failed };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::gradient_converged: return "gradient_converged";
    case SolveStatus::stopped_on_target: return "stopped_on_target";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

struct LbfgsOptions {
  int memory = 12;
  double gtol = 1e-8;  // max-norm of the gradient over the unknowns
  int max_iter = 500;
  double f_target = -std::numeric_limits<double>::infinity();
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int ls_max_evals = 60;
};

struct MinimizeReport {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  long evaluations = 0;
  std::vector<double> energy_history;     // value at each iterate (nonincreasing)
  std::vector<double> grad_norm_history;  // max-norm at each iterate
};

namespace detail {

// Strong Wolfe line search (bracketing + bisection zoom). Non-finite trial
// values are treated as failed sufficient decrease, which deterministically
// shrinks the step; the evaluation budget bounds the retries.
template <class F>
bool strong_wolfe(F&& fg, const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0,
                  const Eigen::VectorXd& p, double c1, double c2, int max_evals,
                  double& a_out, double& f_out, Eigen::VectorXd& g_out, Eigen::VectorXd& x_out,
                  long& eval_count) {
  const double d0 = g0.dot(p);
  if (!(d0 < 0.0)) return false;
  int evals = 0;
  auto phi = [&](double a, double& f, Eigen::VectorXd& g) {
    x_out = x + a * p;
    f = fg(x_out, g);
    ++evals;
    ++eval_count;
  };

  auto zoom = [&](double alo, double flo, double ahi) -> bool {
    while (evals < max_evals) {
      const double a = 0.5 * (alo + ahi);
      double fa;
      phi(a, fa, g_out);
      if (!std::isfinite(fa) || fa > f0 + c1 * a * d0 || fa >= flo) {
        ahi = a;
      } else {
        const double da = g_out.dot(p);
        if (std::abs(da) <= -c2 * d0) {
          a_out = a; f_out = fa;
          return true;
        }
        if (da * (ahi - alo) >= 0.0) ahi = alo;
        alo = a; flo = fa;
      }
    }
    // Budget exhausted: accept the best sufficient-decrease point if any.
    if (flo < f0 + c1 * alo * d0 && alo > 0.0) {
      phi(alo, f_out, g_out);
      a_out = alo;
      return std::isfinite(f_out);
    }
    return false;
  };

  double a_prev = 0.0, f_prev = f0;
  double a = 1.0;
  for (int it = 0; evals < max_evals; ++it) {
    double fa;
    phi(a, fa, g_out);
    if (!std::isfinite(fa) || fa > f0 + c1 * a * d0 || (it > 0 && fa >= f_prev))
      return zoom(a_prev, f_prev, a);
    const double da = g_out.dot(p);
    if (std::abs(da) <= -c2 * d0) {
      a_out = a; f_out = fa;
      return true;
    }
    if (da >= 0.0) return zoom(a, fa, a_prev);
    a_prev = a; f_prev = fa;
    a *= 2.0;
  }
  return false;
}

}  // namespace detail

// Limited-memory BFGS with an operator-form initial metric: h0_solve(v)
// must apply a fixed symmetric positive-definite approximation of the
// inverse Hessian. The classical scalar scaling is retained as
// τ = (s·y)/(y·H₀⁻¹y) so the metric's overall magnitude follows the most
// recent curvature pair. Pass the identity to recover standard L-BFGS.
template <class F, class P>
MinimizeReport lbfgs_minimize(F&& fg, P&& h0_solve, Eigen::VectorXd& x, const LbfgsOptions& opt) {
  MinimizeReport rep;
  struct Pair { Eigen::VectorXd s, y; double rho; };
  std::deque<Pair> mem;

  Eigen::VectorXd g(x.size()), g_new(x.size()), x_new(x.size());
  double f = fg(x, g);
  ++rep.evaluations;
  if (!std::isfinite(f)) throw numerical_error("lbfgs: non-finite energy at the initial iterate");
  rep.energy_history.push_back(f);
  rep.grad_norm_history.push_back(g.lpNorm<Eigen::Infinity>());

  double tau = 1.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= opt.gtol) {
      rep.status = SolveStatus::gradient_converged;
      return rep;
    }
    if (f <= opt.f_target) {
      rep.status = SolveStatus::stopped_on_target;
      return rep;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(mem.size());
    for (size_t i = mem.size(); i-- > 0;) {
      alpha[i] = mem[i].rho * mem[i].s.dot(q);
      q -= alpha[i] * mem[i].y;
    }
    Eigen::VectorXd r = tau * h0_solve(q);
    for (size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * mem[i].y.dot(r);
      r += (alpha[i] - beta) * mem[i].s;
    }
    Eigen::VectorXd p = -r;
    if (!(g.dot(p) < 0.0)) {
      // Defensive reset: drop the memory and fall back to the fixed metric.
      mem.clear();
      p = -h0_solve(g);
      if (!(g.dot(p) < 0.0)) {
        rep.status = SolveStatus::line_search_failed;
        return rep;
      }
    }

    double a = 0.0, f_new = 0.0;
    if (!detail::strong_wolfe(fg, x, f, g, p, opt.wolfe_c1, opt.wolfe_c2, opt.ls_max_evals,
                              a, f_new, g_new, x_new, rep.evaluations)) {
      rep.status = SolveStatus::line_search_failed;
      return rep;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const Eigen::VectorXd hy = h0_solve(yv);
      const double yhy = yv.dot(hy);
      if (yhy > 0.0) tau = sy / yhy;
      mem.push_back({s, yv, 1.0 / sy});
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }

    x = x_new;
    f = f_new;
    g.swap(g_new);
    ++rep.iterations;
    rep.energy_history.push_back(f);
    rep.grad_norm_history.push_back(g.lpNorm<Eigen::Infinity>());
  }
  rep.status = SolveStatus::max_iterations;
  return rep;
}

}  // namespace dcone
