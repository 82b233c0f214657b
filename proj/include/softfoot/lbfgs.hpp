#pragma once

// Limited-memory BFGS with backtracking Armijo line search, specialized for
// the penalty energies in this library: coordinates can be frozen (held at
// their initial values), inner products go through a caller-supplied dot so
// reductions stay mirror-stable, and an abort callback implements the
// divergence safety box. Descent is monotone by construction.

#include "softfoot/geometry.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace softfoot {

enum class MinimizeStatus { Converged, MaxIterations, LineSearchFailed, Aborted };

struct MinimizeOptions {
  int max_iterations = 5000;
  int memory = 10;
  double grad_tol = 1e-3;      // on the caller-scaled norm
  int max_linesearch = 50;
  int max_expansions = 40;
  double armijo_c = 1e-4;
  double first_step_cap = 1e4;  // largest coordinate move on a fresh descent
};

struct MinimizeResult {
  VecX x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  MinimizeStatus status = MinimizeStatus::MaxIterations;
  std::vector<double> energy_history;
};

// funcs:
//   f(x)                -> double
//   fg(x, grad&)        -> double (fills full gradient)
//   dot(a, b)           -> double (mirror-stable inner product)
//   norm(g)             -> double (scaled convergence norm)
//   abort(x)            -> bool   (true stops the run as Diverged)
template <class F, class FG, class Dot, class Norm, class Abort>
MinimizeResult lbfgs_minimize(VecX x, const std::vector<int>& frozen, F&& f, FG&& fg,
                              Dot&& dot, Norm&& norm, Abort&& abort,
                              const MinimizeOptions& opt) {
  const auto n = x.size();
  std::vector<bool> is_frozen(static_cast<size_t>(n), false);
  for (int i : frozen) is_frozen[static_cast<size_t>(i)] = true;
  auto mask = [&](VecX& v) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_frozen[static_cast<size_t>(i)]) v[i] = 0.0;
    }
  };

  MinimizeResult res;
  VecX g(n), g_new(n), d(n), x_new(n);
  std::vector<VecX> s_hist, y_hist;
  std::vector<double> rho_hist;

  double fx = fg(x, g);
  mask(g);
  res.energy_history.push_back(fx);
  if (!std::isfinite(fx)) {
    res.x = x;
    res.f = fx;
    res.status = MinimizeStatus::LineSearchFailed;
    return res;
  }

  bool fresh_descent = true;  // first iteration or just-reset memory
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter;
    res.grad_norm = norm(g);
    if (res.grad_norm <= opt.grad_tol) {
      res.status = MinimizeStatus::Converged;
      break;
    }

    // two-loop recursion
    d = -g;
    const size_t hist = s_hist.size();
    if (hist > 0) {
      std::vector<double> alpha(hist);
      for (size_t i = hist; i-- > 0;) {
        alpha[i] = rho_hist[i] * dot(s_hist[i], d);
        d -= alpha[i] * y_hist[i];
      }
      const double yy = dot(y_hist.back(), y_hist.back());
      if (yy > 0.0) d *= 1.0 / (rho_hist.back() * yy);
      for (size_t i = 0; i < hist; ++i) {
        const double beta = rho_hist[i] * dot(y_hist[i], d);
        d += (alpha[i] - beta) * s_hist[i];
      }
    }
    mask(d);

    double gd = dot(g, d);
    if (!(gd < 0.0)) {  // not a descent direction: reset to steepest
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      mask(d);
      gd = dot(g, d);
      fresh_descent = true;
      if (!(gd < 0.0)) {
        res.status = MinimizeStatus::LineSearchFailed;
        res.x = x;
        res.f = fx;
        return res;
      }
    }

    double step = 1.0;
    if (fresh_descent) {
      const double dmax = d.cwiseAbs().maxCoeff();
      if (dmax > opt.first_step_cap) step = opt.first_step_cap / dmax;
    }

    // backtracking Armijo with quadratic interpolation, then greedy
    // expansion while the energy keeps dropping (fast on long gravity
    // descents and toppling runs)
    bool accepted = false;
    double f_new = fx;
    for (int ls = 0; ls < opt.max_linesearch; ++ls) {
      x_new = x + step * d;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + opt.armijo_c * step * gd) {
        accepted = true;
        break;
      }
      double next = 0.5 * step;
      if (std::isfinite(f_new)) {
        const double denom = f_new - fx - step * gd;
        if (denom > 0.0) {
          const double interp = -0.5 * gd * step * step / denom;
          next = std::clamp(interp, 0.1 * step, 0.5 * step);
        }
      }
      step = next;
      if (step < 1e-18) break;
    }
    if (accepted) {
      for (int grow = 0; grow < opt.max_expansions; ++grow) {
        const VecX x_try = x + (2.0 * step) * d;
        const double f_try = f(x_try);
        if (!std::isfinite(f_try) || f_try >= f_new) break;
        step *= 2.0;
        x_new = x_try;
        f_new = f_try;
      }
    }
    if (!accepted) {
      if (!fresh_descent) {
        // drop the curvature history and retry from steepest descent
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        fresh_descent = true;
        continue;
      }
      res.status = MinimizeStatus::LineSearchFailed;
      break;
    }

    const double f_old = fx;
    fx = fg(x_new, g_new);
    mask(g_new);
    res.energy_history.push_back(fx);
    (void)f_old;

    VecX s = x_new - x;
    VecX y = g_new - g;
    x.swap(x_new);
    g.swap(g_new);
    fresh_descent = false;

    if (abort(x)) {
      res.status = MinimizeStatus::Aborted;
      break;
    }

    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
  }

  if (res.status == MinimizeStatus::MaxIterations && norm(g) <= opt.grad_tol) {
    res.status = MinimizeStatus::Converged;
  }
  res.x = std::move(x);
  res.f = fx;
  res.grad_norm = norm(g);
  return res;
}

}  // namespace softfoot
