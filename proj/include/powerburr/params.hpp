#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powerburr {

/// The six PowerBurr parameters, all strictly positive.
///
/// The Burr variate X = G_theta / G_alpha (unit-mean Gammas) is mapped to the
/// loss scale by z = beta * ((1 + x^eta / tau)^gamma - 1). PowerBurr5 is the
/// eta = 1 subfamily, and plain Burr has tau = gamma = eta = 1.
struct ParamVector {
  double alpha = 1.0;
  double theta = 1.0;
  double beta = 1.0;
  double tau = 1.0;
  double gamma = 1.0;
  double eta = 1.0;

  static constexpr std::size_t size = 6;

  /// Throws DomainError unless every component is finite and > 0.
  void validate() const;
  bool is_valid() const noexcept;

  std::array<double, 6> as_array() const noexcept {
    return {alpha, theta, beta, tau, gamma, eta};
  }
  static ParamVector from_array(const std::array<double, 6>& a) noexcept {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// The ten claim-size families of the simulation study, in table order.
enum class FamilyKind {
  LogNormal,
  LogGamma,
  Weibull,
  Pareto,
  Gamma,
  ExtendedPareto,
  FourParam,
  FiveParam,
  FiveParam2,
  SixParam,
};

inline constexpr std::array<FamilyKind, 10> kAllFamilies = {
    FamilyKind::LogNormal,      FamilyKind::LogGamma,  FamilyKind::Weibull,
    FamilyKind::Pareto,         FamilyKind::Gamma,     FamilyKind::ExtendedPareto,
    FamilyKind::FourParam,      FamilyKind::FiveParam, FamilyKind::FiveParam2,
    FamilyKind::SixParam};

/// The six classical families reported as "true" columns by default.
inline constexpr std::array<FamilyKind, 6> kClassicalFamilies = {
    FamilyKind::LogNormal, FamilyKind::LogGamma, FamilyKind::Weibull,
    FamilyKind::Pareto,    FamilyKind::Gamma,    FamilyKind::ExtendedPareto};

std::size_t arity(FamilyKind kind) noexcept;
bool is_powerburr(FamilyKind kind) noexcept;

/// Short label used in tables ("L-N", "E. Pa.", "5-par. 2", ...).
std::string_view short_label(FamilyKind kind) noexcept;
/// Identifier used on the command line and in files ("lognormal", "sixparam", ...).
std::string_view identifier(FamilyKind kind) noexcept;
/// Parses identifier() or short_label(); case-insensitive. Throws UnsupportedKind.
FamilyKind parse_family(std::string_view name);

/// A family together with its parameters in the family's own layout:
///
///   LogNormal       (xi, sigma)            log Z ~ N(xi, sigma^2)
///   LogGamma        (xi, theta)            log(1+Z) = xi * G_theta
///   Weibull         (shape k, scale b)     Z = b * E^(1/k), E ~ Exp(1)
///   Pareto          (alpha, beta)          Pr(Z > z) = (1 + z/beta)^-alpha
///   Gamma           (xi, alpha)            Z = xi * G_alpha (mean xi)
///   ExtendedPareto  (alpha, theta, beta)
///   FourParam       (alpha, theta, beta, eta)            tau = gamma = 1
///   FiveParam       (alpha, theta, beta, tau, gamma)     eta = 1
///   FiveParam2      (alpha, theta, beta, eta, gamma)     tau = 1
///   SixParam        (alpha, theta, beta, eta, tau, gamma)
///
/// G_a denotes a Gamma variable with shape a and mean 1.
class FamilySpec {
 public:
  FamilySpec(FamilyKind kind, std::vector<double> params);

  FamilyKind kind() const noexcept { return kind_; }
  std::span<const double> params() const noexcept { return params_; }
  double operator[](std::size_t i) const { return params_.at(i); }

  /// Full six-vector for the PowerBurr-based kinds; nullopt for the rest.
  std::optional<ParamVector> powerburr_params() const;

  /// Embeds a ParamVector into a PowerBurr-based layout. The fixed components
  /// of `phi` are ignored (e.g. tau and gamma for FourParam).
  static FamilySpec from_powerburr(FamilyKind kind, const ParamVector& phi);

  std::string to_string() const;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;

 private:
  FamilyKind kind_;
  std::vector<double> params_;
};

/// Parses "kind:p1,p2,..." (e.g. "sixparam:4,2,4,1.3,10,1.2").
FamilySpec parse_family_spec(std::string_view text);

/// The parameter rows used by the simulation study for each family.
FamilySpec study_parameters(FamilyKind kind);

}  // namespace powerburr
