#include "powerburr/fitting.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "lbfgs.hpp"
#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/numerics.hpp"

namespace powerburr {

namespace nm = numerics;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kBig = 1e10;  // stand-in for "-> infinity" in the start recipes

// Position of each layout entry inside (alpha, theta, beta, tau, gamma, eta).
std::span<const int> layout_slots(FamilyKind kind) {
  static constexpr int epa[] = {0, 1, 2};
  static constexpr int four[] = {0, 1, 2, 5};
  static constexpr int five[] = {0, 1, 2, 3, 4};
  static constexpr int five2[] = {0, 1, 2, 5, 4};
  static constexpr int six[] = {0, 1, 2, 5, 3, 4};
  switch (kind) {
    case FamilyKind::ExtendedPareto: return epa;
    case FamilyKind::FourParam: return four;
    case FamilyKind::FiveParam: return five;
    case FamilyKind::FiveParam2: return five2;
    case FamilyKind::SixParam: return six;
    default: throw UnsupportedKind("not a PowerBurr family");
  }
}

// Sum of log f(z_i; phi); `grad` (six entries, may be empty) receives the partials.
double powerburr_loglik(std::span<const double> z, const ParamVector& phi, double* grad,
                        std::vector<double>* terms) {
  const double a = phi.alpha, th = phi.theta, be = phi.beta, ta = phi.tau, ga = phi.gamma,
               et = phi.eta;
  const double log_a = std::log(a), log_th = std::log(th), log_ta = std::log(ta);
  const double log_c = nm::log_gamma_ratio(a, th) + nm::b_log_b_minus_lgamma(th) + log_ta -
                       std::log(ga) - std::log(be) - std::log(et);
  const double n = static_cast<double>(z.size());
  double sum = n * log_c;
  double s_alpha = 0, s_theta = 0, s_beta = 0, s_tau = 0, s_gamma = 0, s_eta = 0;
  for (double zi : z) {
    const double q = zi / be;
    const double s = std::log1p(q) / ga;  // log(1 + x^eta / tau)
    if (!(s > 0.0) || !std::isfinite(s)) return kNegInf;
    const double log_x = (log_ta + nm::log_expm1(s)) / et;
    const double t = log_th + log_x - log_a;  // log(theta x / alpha)
    const double l1p = nm::log1pexp(t);
    const double term = (th - et) * log_x - (a + th) * l1p - (ga - 1.0) * s;
    sum += term;
    if (terms) terms->push_back(log_c + term);
    if (!grad) continue;

    const double r = nm::sigmoid(t);  // u / (1 + u)
    const double h = (th - et) - (a + th) * r;  // d log f / d log x
    const double dlogx_ds = -1.0 / std::expm1(-s) / et;  // e^s / (e^s - 1) / eta
    const double ds_dbeta = -q / (be * (1.0 + q) * ga);
    const double ds_dgamma = -s / ga;
    const double via_s = h * dlogx_ds - (ga - 1.0);

    // u/(1+u) - log(1+u), series for small u
    const double rml = t < -7.0 ? nm::ratio_minus_log1p(std::exp(t)) : r - l1p;
    s_alpha += rml + th * r / a;
    s_theta += log_x - l1p - (a + th) * r / th;
    s_beta += via_s * ds_dbeta;
    s_tau += h / (et * ta);
    s_gamma += via_s * ds_dgamma - s;
    s_eta += -log_x - h * log_x / et;
  }
  if (grad) {
    grad[0] = s_alpha + n * nm::log_gamma_ratio_da(a, th);
    grad[1] = s_theta + n * (nm::log_gamma_ratio_db(a, th) + nm::log_minus_digamma_plus_one(th));
    grad[2] = s_beta - n / be;
    grad[3] = s_tau + n / ta;
    grad[4] = s_gamma - n / ga;
    grad[5] = s_eta - n / et;
  }
  return std::isfinite(sum) ? sum : kNegInf;
}

// Gamma with mean `mean` and shape `shape` evaluated at y (y > 0).
struct GammaSums {
  double sum_y = 0, sum_log_y = 0;
};

double gamma_loglik(double n, const GammaSums& s, double mean, double shape, double* grad) {
  const double ll = n * (nm::b_log_b_minus_lgamma(shape) - shape * std::log(mean)) +
                    (shape - 1.0) * s.sum_log_y - shape * s.sum_y / mean;
  if (grad) {
    grad[0] = -n * shape / mean + shape * s.sum_y / (mean * mean);
    grad[1] = n * (nm::log_minus_digamma_plus_one(shape) - std::log(mean)) + s.sum_log_y -
              s.sum_y / mean;
  }
  return ll;
}

double classical_loglik(std::span<const double> z, FamilyKind kind, std::span<const double> p,
                        double* grad, std::vector<double>* terms) {
  const double n = static_cast<double>(z.size());
  if (terms) {
    const FamilySpec spec(kind, std::vector<double>(p.begin(), p.end()));
    for (double zi : z) terms->push_back(log_pdf(zi, spec));
  }
  switch (kind) {
    case FamilyKind::LogNormal: {
      const double xi = p[0], sigma = p[1];
      double sum_lz = 0, sum_d2 = 0, sum_d = 0;
      for (double zi : z) {
        const double lz = std::log(zi);
        sum_lz += lz;
        sum_d += lz - xi;
        sum_d2 += (lz - xi) * (lz - xi);
      }
      if (grad) {
        grad[0] = sum_d / (sigma * sigma);
        grad[1] = -n / sigma + sum_d2 / (sigma * sigma * sigma);
      }
      return -sum_lz - n * (std::log(sigma) + kHalfLog2Pi) - 0.5 * sum_d2 / (sigma * sigma);
    }
    case FamilyKind::LogGamma: {
      GammaSums s;
      double sum_y = 0;
      for (double zi : z) {
        const double y = std::log1p(zi);
        s.sum_y += y;
        s.sum_log_y += std::log(y);
        sum_y += y;
      }
      return gamma_loglik(n, s, p[0], p[1], grad) - sum_y;
    }
    case FamilyKind::Gamma: {
      GammaSums s;
      for (double zi : z) {
        s.sum_y += zi;
        s.sum_log_y += std::log(zi);
      }
      return gamma_loglik(n, s, p[0], p[1], grad);
    }
    case FamilyKind::Weibull: {
      const double k = p[0], b = p[1];
      double ll = n * (std::log(k) - std::log(b)), dk = n / k, db = -n * k / b;
      for (double zi : z) {
        const double lr = std::log(zi / b);
        const double pw = std::exp(k * lr);
        ll += (k - 1.0) * lr - pw;
        dk += lr - pw * lr;
        db += k * pw / b;
      }
      if (grad) {
        grad[0] = dk;
        grad[1] = db;
      }
      return ll;
    }
    case FamilyKind::Pareto: {
      const double al = p[0], be = p[1];
      double sum_l = 0, sum_r = 0;
      for (double zi : z) {
        sum_l += std::log1p(zi / be);
        sum_r += zi / (be * (be + zi));
      }
      if (grad) {
        grad[0] = n / al - sum_l;
        grad[1] = -n / be + (al + 1.0) * sum_r;
      }
      return n * (std::log(al) - std::log(be)) - (al + 1.0) * sum_l;
    }
    default:
      throw UnsupportedKind("not a classical family");
  }
}

// ---- start values for the simpler families ---------------------------------

struct Moments {
  double mean, var;
};

Moments moments_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0};
}

double clamp_shape(double shape) {
  if (!std::isfinite(shape) || shape > 1e12) return 1e12;
  return std::max(shape, 1e-6);
}

std::vector<double> lognormal_start(std::span<const double> z) {
  std::vector<double> lz(z.size());
  std::transform(z.begin(), z.end(), lz.begin(), [](double v) { return std::log(v); });
  const Moments m = moments_of(lz);
  return {m.mean, std::max(std::sqrt(m.var), 1e-6)};
}

std::vector<double> loggamma_start(std::span<const double> z) {
  std::vector<double> y(z.size());
  std::transform(z.begin(), z.end(), y.begin(), [](double v) { return std::log1p(v); });
  const Moments m = moments_of(y);
  return {m.mean, clamp_shape(m.mean * m.mean / m.var)};
}

std::vector<double> gamma_start(std::span<const double> z) {
  const Moments m = moments_of(z);
  return {m.mean, clamp_shape(m.mean * m.mean / m.var)};
}

// Matches the coefficient of variation: Gamma(1+2/k)/Gamma(1+1/k)^2 - 1.
std::vector<double> weibull_start(std::span<const double> z) {
  const Moments m = moments_of(z);
  const double cv2 = m.var / (m.mean * m.mean);
  auto cv2_of = [](double k) {
    return std::exp(boost::math::lgamma(1.0 + 2.0 / k) - 2.0 * boost::math::lgamma(1.0 + 1.0 / k)) -
           1.0;
  };
  double lo = std::log(0.05), hi = std::log(1e3);  // cv2_of decreases in k
  if (!(cv2 > 0.0)) {
    lo = hi;
  } else if (cv2 >= cv2_of(std::exp(lo))) {
    hi = lo;
  } else {
    for (int i = 0; i < 100 && hi - lo > 1e-10; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cv2_of(std::exp(mid)) > cv2 ? lo : hi) = mid;
    }
  }
  const double k = std::exp(0.5 * (lo + hi));
  return {k, m.mean / std::exp(boost::math::lgamma(1.0 + 1.0 / k))};
}

// beta from the median, alpha from the resulting log-excess mean.
std::vector<double> pareto_start(std::span<const double> z) {
  std::vector<double> sorted(z.begin(), z.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double beta = sorted[sorted.size() / 2];
  double s = 0.0;
  for (double v : z) s += std::log1p(v / beta);
  return {static_cast<double>(z.size()) / s, beta};
}

// Hill estimate of the tail index from the top sqrt(n) order statistics.
double hill_tail_index(std::span<const double> z) {
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k =
      std::min(sorted.size() - 1, std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(sorted.size()))));
  if (k == 0) return std::numeric_limits<double>::infinity();
  const double base = std::log(sorted[k]);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(sorted[i]) - base;
  return s > 0.0 ? static_cast<double>(k) / s : std::numeric_limits<double>::infinity();
}

std::string describe(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

FitResult fit_lognormal(const ClaimSample& sample) {
  const auto z = sample.values();
  double xi = 0.0;
  for (double v : z) xi += std::log(v);
  xi /= static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (std::log(v) - xi) * (std::log(v) - xi);
  const double sigma = std::sqrt(ss / static_cast<double>(z.size()));
  if (!(sigma > 0.0)) throw FitFailure("lognormal: log-claims have zero spread");
  std::vector<double> est{xi, sigma};
  const double ll = loglik_with_gradient(z, FamilyKind::LogNormal, est, {});
  FitResult r{FamilySpec(FamilyKind::LogNormal, est), ll, true, 0, 0, {}};
  r.starts.push_back({est, est, ll, true, 0, "closed form"});
  return r;
}

}  // namespace

double loglik_with_gradient(std::span<const double> z, FamilyKind kind,
                            std::span<const double> params, std::span<double> grad) {
  if (params.size() != arity(kind)) throw DomainError("parameter count does not match family");
  if (!grad.empty() && grad.size() != params.size()) throw DomainError("gradient size mismatch");
  if (!is_powerburr(kind)) return classical_loglik(z, kind, params, grad.empty() ? nullptr : grad.data(), nullptr);
  const auto slots = layout_slots(kind);
  std::array<double, 6> full{1, 1, 1, 1, 1, 1};
  for (std::size_t i = 0; i < slots.size(); ++i) full[slots[i]] = params[i];
  std::array<double, 6> g6{};
  const double ll = powerburr_loglik(z, ParamVector::from_array(full), grad.empty() ? nullptr : g6.data(), nullptr);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = g6[slots[i]];
  return ll;
}

LogLikelihood loglik(const ClaimSample& sample, const FamilySpec& spec, bool keep_terms) {
  if (sample.size() == 0) throw EmptySample("loglik: empty sample");
  LogLikelihood out;
  out.n = sample.size();
  std::vector<double> terms;
  if (keep_terms) terms.reserve(sample.size());
  if (auto phi = spec.powerburr_params()) {
    out.value = powerburr_loglik(sample.values(), *phi, nullptr, keep_terms ? &terms : nullptr);
  } else {
    out.value = classical_loglik(sample.values(), spec.kind(), spec.params(), nullptr,
                                 keep_terms ? &terms : nullptr);
  }
  if (!std::isfinite(out.value)) out.value = kNegInf;
  if (keep_terms) out.per_observation = std::move(terms);
  return out;
}

Gradient gradient(const ClaimSample& sample, const ParamVector& phi) {
  if (sample.size() == 0) throw EmptySample("gradient: empty sample");
  phi.validate();
  std::array<double, 6> g{};
  if (!std::isfinite(powerburr_loglik(sample.values(), phi, g.data(), nullptr))) {
    throw NumericError("gradient: the transform underflows for this sample");
  }
  return {g[0], g[1], g[2], g[3], g[4], g[5]};
}

std::array<double, 3> moment_start_extended_pareto(const ClaimSample& sample) {
  const auto z = sample.values();
  const double mean = z.empty() ? 1.0 : sample.mean();
  const std::array<double, 3> fallback{3.0, 1.0, mean};
  if (z.size() < 3 || hill_tail_index(z) <= 3.0) return fallback;

  double m1 = 0, m2 = 0, m3 = 0;
  for (double v : z) {
    const double w = v / mean;  // scale-free moments
    m1 += w;
    m2 += w * w;
    m3 += w * w * w;
  }
  const double n = static_cast<double>(z.size());
  m1 /= n;
  m2 /= n;
  m3 /= n;
  const double r2 = m2 / (m1 * m1), r3 = m3 / (m1 * m1 * m1);
  if (!(r2 > 1.0 + 1e-9) || !std::isfinite(r3)) return fallback;

  // The second-moment ratio pins theta given alpha; solve the third in alpha.
  // alpha = a_lo + e^v with a_lo the smallest alpha giving a positive theta.
  const double a_lo = std::max(3.0, (2.0 * r2 - 1.0) / (r2 - 1.0));
  auto alpha_of = [&](double v) { return a_lo + std::exp(v); };
  auto theta_of = [&](double a) { return 1.0 / (r2 * (a - 2.0) / (a - 1.0) - 1.0); };
  auto residual = [&](double v) {
    const double a = alpha_of(v);
    const double th = theta_of(a);
    return std::log1p(1.0 / th) + std::log1p(2.0 / th) + 2.0 * std::log(a - 1.0) -
           std::log(a - 2.0) - std::log(a - 3.0) - std::log(r3);
  };
  double lo = std::log(1e-8 * a_lo), hi = std::log(1e8);
  double f_lo = residual(lo), f_hi = residual(hi);
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || f_lo * f_hi > 0.0) return fallback;
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40), iters);
  const double a = alpha_of(0.5 * (root.first + root.second));
  const double th = theta_of(a);
  if (!(a > 3.0) || !(th > 0.0) || !std::isfinite(th)) return fallback;
  // E(Z) = beta * alpha / (alpha - 1)
  return {a, th, mean * m1 * (a - 1.0) / a};
}

FitResult fit(const ClaimSample& sample, FamilyKind kind, const StartSet& starts,
              const FitOptions& options) {
  if (sample.size() == 0) throw EmptySample("fit: empty sample");
  if (kind == FamilyKind::LogNormal) return fit_lognormal(sample);
  const StartSet effective = starts.empty() ? default_starts(kind, sample) : starts;
  const auto z = sample.values();
  const std::size_t dim = arity(kind);

  detail::LbfgsSettings cfg;
  cfg.lower = -options.log_param_bound;
  cfg.upper = options.log_param_bound;
  cfg.max_iterations = options.max_iterations;
  cfg.memory = options.memory;
  const double tol = options.gradient_tolerance;
  cfg.tolerance = [tol](double f) { return tol * std::max(1.0, std::fabs(f)); };

  std::vector<double> params(dim), grad(dim);
  const detail::Objective objective = [&](std::span<const double> y, std::span<double> g) {
    for (std::size_t i = 0; i < dim; ++i) params[i] = std::exp(y[i]);
    double ll;
    try {
      ll = loglik_with_gradient(z, kind, params, grad);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    for (std::size_t i = 0; i < dim; ++i) {
      g[i] = -params[i] * grad[i];
      if (!std::isfinite(g[i])) return std::numeric_limits<double>::quiet_NaN();
    }
    return -ll;
  };

  std::vector<StartOutcome> outcomes;
  std::optional<std::size_t> best;
  const double tie = 1e-9 * static_cast<double>(z.size());
  for (std::size_t k = 0; k < effective.size(); ++k) {
    const auto& start = effective[k];
    StartOutcome o;
    o.start = start;
    if (start.size() != dim) throw DomainError("start vector has the wrong length for " + std::string(identifier(kind)));
    if (std::any_of(start.begin(), start.end(), [](double v) { return !(v > 0.0) || !std::isfinite(v); })) {
      throw DomainError("start vector " + describe(start) + " is not strictly positive");
    }
    std::vector<double> y0(dim);
    std::transform(start.begin(), start.end(), y0.begin(), [](double v) { return std::log(v); });
    const auto res = detail::minimize_lbfgs(objective, y0, cfg);
    o.iterations = res.iterations;
    o.converged = res.converged;
    o.message = res.message;
    o.loglik = -res.f;
    if (std::isfinite(res.f)) {
      o.estimate.resize(dim);
      std::transform(res.x.begin(), res.x.end(), o.estimate.begin(), [](double v) { return std::exp(v); });
      if (!best || o.loglik > outcomes[*best].loglik + tie) best = k;
    } else {
      o.loglik = kNegInf;
    }
    outcomes.push_back(std::move(o));
  }
  if (!best) {
    std::ostringstream os;
    os << identifier(kind) << ": every start failed";
    for (const auto& o : outcomes) os << "; start " << describe(o.start) << ": " << o.message;
    throw FitFailure(os.str());
  }
  const StartOutcome& w = outcomes[*best];
  FitResult r{FamilySpec(kind, w.estimate), w.loglik, w.converged, *best, w.iterations, {}};
  r.starts = std::move(outcomes);
  return r;
}

FitCascade::FitCascade(const ClaimSample& sample, FitOptions options)
    : sample_(sample), options_(options) {
  if (sample.size() == 0) throw EmptySample("fit: empty sample");
}

const FitResult* FitCascade::try_fit(FamilyKind kind) {
  auto it = cache_.find(kind);
  if (it == cache_.end()) {
    std::optional<FitResult> r;
    try {
      r = powerburr::fit(sample_, kind, starts(kind), options_);
    } catch (const FitFailure& e) {
      errors_[kind] = e.what();
    }
    it = cache_.emplace(kind, std::move(r)).first;
  }
  return it->second ? &*it->second : nullptr;
}

const FitResult& FitCascade::fit(FamilyKind kind) {
  if (const FitResult* r = try_fit(kind)) return *r;
  throw FitFailure(errors_[kind]);
}

StartSet FitCascade::starts(FamilyKind kind) {
  const auto z = sample_.values();
  // Estimates of a prerequisite family, or its own first start if it failed.
  auto estimate = [&](FamilyKind k) -> std::vector<double> {
    if (const FitResult* r = try_fit(k)) {
      const auto p = r->spec.params();
      return {p.begin(), p.end()};
    }
    return starts(k).front();
  };
  switch (kind) {
    case FamilyKind::LogNormal: return {lognormal_start(z)};
    case FamilyKind::LogGamma: return {loggamma_start(z)};
    case FamilyKind::Weibull: return {weibull_start(z)};
    case FamilyKind::Pareto: return {pareto_start(z)};
    case FamilyKind::Gamma: return {gamma_start(z)};
    case FamilyKind::ExtendedPareto: {
      const auto m = moment_start_extended_pareto(sample_);
      const auto ga = estimate(FamilyKind::Gamma);   // (mean, shape)
      const auto pa = estimate(FamilyKind::Pareto);  // (alpha, beta)
      // theta = 1 turns the Burr survival into (1 + z/(alpha beta))^-alpha
      return {{m[0], m[1], m[2]}, {kBig, ga[1], ga[0]}, {pa[0], 1.0, pa[1] / pa[0]}};
    }
    case FamilyKind::FourParam: {
      const auto ep = estimate(FamilyKind::ExtendedPareto);
      const auto we = estimate(FamilyKind::Weibull);  // (shape, scale)
      return {{ep[0], ep[1], ep[2], 1.0}, {kBig, 1.0, we[1], 1.0 / we[0]}};
    }
    case FamilyKind::FiveParam: {
      const auto ep = estimate(FamilyKind::ExtendedPareto);
      const auto lg = estimate(FamilyKind::LogGamma);  // (xi, theta)
      return {{ep[0], ep[1], ep[2], 1.0, 1.0}, {kBig, lg[1], 1.0, kBig, lg[0] * kBig}};
    }
    case FamilyKind::FiveParam2: {
      const auto fp = estimate(FamilyKind::FourParam);
      return {{fp[0], fp[1], fp[2], fp[3], 1.0}};
    }
    case FamilyKind::SixParam: {
      const auto f5 = estimate(FamilyKind::FiveParam);   // (alpha, theta, beta, tau, gamma)
      const auto f52 = estimate(FamilyKind::FiveParam2);  // (alpha, theta, beta, eta, gamma)
      return {{f5[0], f5[1], f5[2], 1.0, f5[3], f5[4]}, {f52[0], f52[1], f52[2], f52[3], 1.0, f52[4]}};
    }
  }
  throw UnsupportedKind("unknown family");
}

StartSet default_starts(FamilyKind kind, const ClaimSample& sample) {
  FitCascade cascade(sample);
  return cascade.starts(kind);
}

}  // namespace powerburr
