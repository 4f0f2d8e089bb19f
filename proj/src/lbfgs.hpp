#pragma once

// Box-constrained limited-memory BFGS with a backtracking Armijo search.
// Components sitting on a bound with the gradient pushing outward are frozen
// for that iteration.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace powerburr::detail {

/// Returns f(x) and writes the gradient; a non-finite return rejects x.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsSettings {
  double lower = -30.0;
  double upper = 30.0;
  int max_iterations = 500;
  int memory = 10;
  /// converged once the projected gradient max-norm is below this function of f
  std::function<double(double)> tolerance = [](double f) { return 1e-6 * std::max(1.0, std::fabs(f)); };
  double max_step = 5.0;  // largest move in any coordinate per iteration
};

struct LbfgsOutcome {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

inline LbfgsOutcome minimize_lbfgs(const Objective& objective, std::vector<double> x,
                                   const LbfgsSettings& cfg) {
  const std::size_t dim = x.size();
  for (double& v : x) v = std::clamp(v, cfg.lower, cfg.upper);
  std::vector<double> g(dim), pg(dim), d(dim), xn(dim), gn(dim);
  LbfgsOutcome out;
  double f = objective(x, g);
  if (!std::isfinite(f)) {
    out.x = x;
    out.f = f;
    out.message = "objective not finite at the start";
    return out;
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;
  std::vector<double> alpha_buf;
  int stalls = 0;

  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::fabs(e));
    return m;
  };

  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    for (std::size_t i = 0; i < dim; ++i) {
      const bool at_lo = x[i] <= cfg.lower && g[i] > 0.0;
      const bool at_hi = x[i] >= cfg.upper && g[i] < 0.0;
      pg[i] = (at_lo || at_hi) ? 0.0 : g[i];
    }
    if (max_abs(pg) < cfg.tolerance(f)) {
      out.converged = true;
      out.message = "gradient tolerance reached";
      break;
    }
    if (iter >= cfg.max_iterations) {
      out.message = "iteration limit reached";
      break;
    }

    // two-loop recursion on the projected gradient
    d = pg;
    alpha_buf.assign(history.size(), 0.0);
    for (std::size_t k = history.size(); k-- > 0;) {
      double a = 0.0;
      for (std::size_t i = 0; i < dim; ++i) a += history[k].s[i] * d[i];
      a *= history[k].rho;
      alpha_buf[k] = a;
      for (std::size_t i = 0; i < dim; ++i) d[i] -= a * history[k].y[i];
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      double yy = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        yy += last.y[i] * last.y[i];
        sy += last.s[i] * last.y[i];
      }
      for (double& e : d) e *= sy / yy;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      double b = 0.0;
      for (std::size_t i = 0; i < dim; ++i) b += history[k].y[i] * d[i];
      b *= history[k].rho;
      for (std::size_t i = 0; i < dim; ++i) d[i] += history[k].s[i] * (alpha_buf[k] - b);
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (pg[i] == 0.0) d[i] = 0.0;
      d[i] = -d[i];
      slope += d[i] * pg[i];
    }
    if (!(slope < 0.0)) {
      history.clear();
      for (std::size_t i = 0; i < dim; ++i) d[i] = -pg[i];
      slope = 0.0;
      for (std::size_t i = 0; i < dim; ++i) slope += d[i] * pg[i];
    }

    double step = 1.0;
    if (history.empty()) step = std::min(1.0, 1.0 / max_abs(d));
    step = std::min(step, cfg.max_step / max_abs(d));

    bool accepted = false;
    double fn = f;
    for (int tries = 0; tries < 60; ++tries) {
      double decrease = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        xn[i] = std::clamp(x[i] + step * d[i], cfg.lower, cfg.upper);
        decrease += g[i] * (xn[i] - x[i]);
      }
      fn = objective(xn, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      // minimiser of the quadratic through f, the slope and fn, kept in [0.1, 0.5] * step
      double next = 0.5 * step;
      if (std::isfinite(fn) && decrease < 0.0) {
        const double q = -decrease * step / (2.0 * (fn - f - decrease));
        if (std::isfinite(q)) next = std::clamp(q, 0.1 * step, 0.5 * step);
      }
      step = next;
    }
    if (!accepted) {
      if (!history.empty()) {
        history.clear();  // retry with steepest descent
        continue;
      }
      out.message = "line search failed";
      break;
    }

    Pair p{std::vector<double>(dim), std::vector<double>(dim), 0.0};
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      p.s[i] = xn[i] - x[i];
      p.y[i] = gn[i] - g[i];
      sy += p.s[i] * p.y[i];
      ss += p.s[i] * p.s[i];
      yy += p.y[i] * p.y[i];
    }
    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }
    stalls = (f - fn <= 1e-15 * std::max(1.0, std::fabs(f))) ? stalls + 1 : 0;
    x.swap(xn);
    g.swap(gn);
    f = fn;
    if (stalls >= 20) {
      out.message = "no further progress";
      out.iterations = iter + 1;
      break;
    }
  }
  out.x = std::move(x);
  out.f = f;
  return out;
}

}  // namespace powerburr::detail
