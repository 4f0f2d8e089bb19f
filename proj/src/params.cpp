#include "powerburr/params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "powerburr/errors.hpp"

namespace powerburr {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

bool ParamVector::is_valid() const noexcept {
  return positive_finite(alpha) && positive_finite(theta) && positive_finite(beta) &&
         positive_finite(tau) && positive_finite(gamma) && positive_finite(eta);
}

void ParamVector::validate() const {
  if (!is_valid()) {
    std::ostringstream os;
    os << "PowerBurr parameters must be finite and positive, got (" << alpha << ", "
       << theta << ", " << beta << ", " << tau << ", " << gamma << ", " << eta << ")";
    throw DomainError(os.str());
  }
}

std::size_t arity(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::LogNormal:
    case FamilyKind::LogGamma:
    case FamilyKind::Weibull:
    case FamilyKind::Pareto:
    case FamilyKind::Gamma:
      return 2;
    case FamilyKind::ExtendedPareto:
      return 3;
    case FamilyKind::FourParam:
      return 4;
    case FamilyKind::FiveParam:
    case FamilyKind::FiveParam2:
      return 5;
    case FamilyKind::SixParam:
      return 6;
  }
  return 0;
}

bool is_powerburr(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::ExtendedPareto:
    case FamilyKind::FourParam:
    case FamilyKind::FiveParam:
    case FamilyKind::FiveParam2:
    case FamilyKind::SixParam:
      return true;
    default:
      return false;
  }
}

std::string_view short_label(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::LogNormal: return "L-N";
    case FamilyKind::LogGamma: return "L-G";
    case FamilyKind::Weibull: return "We";
    case FamilyKind::Pareto: return "Pa";
    case FamilyKind::Gamma: return "Ga";
    case FamilyKind::ExtendedPareto: return "E. Pa.";
    case FamilyKind::FourParam: return "4-par.";
    case FamilyKind::FiveParam: return "5-par.";
    case FamilyKind::FiveParam2: return "5-par. 2";
    case FamilyKind::SixParam: return "6-par";
  }
  return "?";
}

std::string_view identifier(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::LogNormal: return "lognormal";
    case FamilyKind::LogGamma: return "loggamma";
    case FamilyKind::Weibull: return "weibull";
    case FamilyKind::Pareto: return "pareto";
    case FamilyKind::Gamma: return "gamma";
    case FamilyKind::ExtendedPareto: return "extpareto";
    case FamilyKind::FourParam: return "fourparam";
    case FamilyKind::FiveParam: return "fiveparam";
    case FamilyKind::FiveParam2: return "fiveparam2";
    case FamilyKind::SixParam: return "sixparam";
  }
  return "?";
}

FamilyKind parse_family(std::string_view name) {
  const std::string key = lower(name);
  for (FamilyKind k : kAllFamilies) {
    if (key == identifier(k) || key == lower(short_label(k))) return k;
  }
  throw UnsupportedKind("unknown family '" + std::string(name) + "'");
}

FamilySpec::FamilySpec(FamilyKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  if (params_.size() != arity(kind_)) {
    std::ostringstream os;
    os << identifier(kind_) << " takes " << arity(kind_) << " parameters, got "
       << params_.size();
    throw DomainError(os.str());
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    // The log-normal location is the only parameter allowed to be <= 0.
    const bool ok = (kind_ == FamilyKind::LogNormal && i == 0) ? std::isfinite(params_[i])
                                                                : positive_finite(params_[i]);
    if (!ok) {
      std::ostringstream os;
      os << identifier(kind_) << ": parameter " << i << " invalid (" << params_[i] << ")";
      throw DomainError(os.str());
    }
  }
}

std::optional<ParamVector> FamilySpec::powerburr_params() const {
  const auto& p = params_;
  switch (kind_) {
    case FamilyKind::ExtendedPareto: return ParamVector{p[0], p[1], p[2], 1.0, 1.0, 1.0};
    case FamilyKind::FourParam: return ParamVector{p[0], p[1], p[2], 1.0, 1.0, p[3]};
    case FamilyKind::FiveParam: return ParamVector{p[0], p[1], p[2], p[3], p[4], 1.0};
    case FamilyKind::FiveParam2: return ParamVector{p[0], p[1], p[2], 1.0, p[4], p[3]};
    case FamilyKind::SixParam: return ParamVector{p[0], p[1], p[2], p[4], p[5], p[3]};
    default: return std::nullopt;
  }
}

FamilySpec FamilySpec::from_powerburr(FamilyKind kind, const ParamVector& f) {
  switch (kind) {
    case FamilyKind::ExtendedPareto: return {kind, {f.alpha, f.theta, f.beta}};
    case FamilyKind::FourParam: return {kind, {f.alpha, f.theta, f.beta, f.eta}};
    case FamilyKind::FiveParam: return {kind, {f.alpha, f.theta, f.beta, f.tau, f.gamma}};
    case FamilyKind::FiveParam2: return {kind, {f.alpha, f.theta, f.beta, f.eta, f.gamma}};
    case FamilyKind::SixParam:
      return {kind, {f.alpha, f.theta, f.beta, f.eta, f.tau, f.gamma}};
    default:
      throw UnsupportedKind(std::string(identifier(kind)) + " is not a PowerBurr family");
  }
}

std::string FamilySpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << identifier(kind_) << ':';
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i) os << ',';
    os << params_[i];
  }
  return os.str();
}

FamilySpec parse_family_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("family spec must look like kind:p1,p2,... (got '" +
                      std::string(text) + "')");
  }
  const FamilyKind kind = parse_family(text.substr(0, colon));
  std::vector<double> values;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string token(rest.substr(0, comma));
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw DomainError("bad number '" + token + "' in family spec");
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return FamilySpec(kind, std::move(values));
}

FamilySpec study_parameters(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::LogNormal: return {kind, {-0.5, 1.0}};
    case FamilyKind::LogGamma: return {kind, {0.75, 5.0}};
    case FamilyKind::Weibull: return {kind, {2.0, 1.13}};
    case FamilyKind::Pareto: return {kind, {3.0, 2.0}};
    case FamilyKind::Gamma: return {kind, {1.0, 2.0}};
    case FamilyKind::ExtendedPareto: return {kind, {3.0, 2.0, 1.0}};
    case FamilyKind::FourParam: return {kind, {4.0, 2.0, 0.6, 1.3}};
    case FamilyKind::FiveParam: return {kind, {4.0, 2.0, 2.7, 5.0, 1.3}};
    case FamilyKind::FiveParam2: return {kind, {4.0, 2.0, 0.5, 1.2, 1.1}};
    case FamilyKind::SixParam: return {kind, {4.0, 2.0, 4.0, 1.3, 10.0, 1.2}};
  }
  throw UnsupportedKind("unknown family");
}

}  // namespace powerburr
