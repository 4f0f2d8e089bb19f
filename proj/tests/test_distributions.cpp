#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "powerburr/distributions.hpp"
#include "powerburr/errors.hpp"
#include "powerburr/families.hpp"
#include "powerburr/sampling.hpp"
#include "test_support.hpp"

using namespace powerburr;

namespace {

// Integral of exp(log_density) over (0, inf), split at 1.
template <class F>
double integrate_density(F&& log_density) {
  auto f = [&](double z) { return z > 0.0 ? std::exp(log_density(z)) : 0.0; };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return ts.integrate(f, 0.0, 1.0, 1e-12) +
         es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-12);
}

const ParamVector kTableSix{4.0, 2.0, 4.0, 10.0, 1.2, 1.3};

}  // namespace

TEST_CASE("burr_log_pdf matches the closed form") {
  CHECK(burr_log_pdf(1.0, 1.0, 1.0) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  // 40-digit evaluation of the Burr density
  CHECK(burr_log_pdf(2.0, 3.0, 1.0) == doctest::Approx(-2.0433024950639627328).epsilon(1e-13));
  CHECK_THROWS_AS(burr_log_pdf(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(burr_log_pdf(-1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("burr density integrates to one") {
  for (auto [a, t] : {std::pair{1.0, 1.0}, {3.0, 2.0}, {0.7, 5.0}, {20.0, 0.4}}) {
    const double total = integrate_density([&](double x) { return burr_log_pdf(x, a, t); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("burr_cdf") {
  SUBCASE("log-logistic case") {
    for (double x : {0.01, 0.5, 1.0, 7.0, 1e3}) {
      CHECK(burr_cdf(x, 1.0, 1.0) == doctest::Approx(x / (1.0 + x)).epsilon(1e-14));
    }
  }
  SUBCASE("median of the F(4, 6) representation") {
    // scipy.stats.f.ppf(0.5, 4, 6)
    CHECK(burr_cdf(0.9419132654862231, 3.0, 2.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(burr_cdf(0.8, 3.0, 2.0) == doctest::Approx(0.43316025886128223).epsilon(1e-12));
  }
  SUBCASE("derivative equals the density") {
    for (double x : {0.05, 0.4, 1.3, 6.0}) {
      const double h = 1e-5 * x;
      const double deriv = (burr_cdf(x + h, 3.0, 2.0) - burr_cdf(x - h, 3.0, 2.0)) / (2 * h);
      CHECK(std::fabs(deriv - std::exp(burr_log_pdf(x, 3.0, 2.0))) < 1e-6);
    }
  }
  SUBCASE("tails are complementary and monotone") {
    double prev = 0.0;
    for (double x = 1e-4; x < 1e4; x *= 1.7) {
      const double c = burr_cdf(x, 2.5, 0.8);
      CHECK(c >= prev);
      CHECK(c + burr_sf(x, 2.5, 0.8) == doctest::Approx(1.0).epsilon(1e-14));
      prev = c;
    }
  }
  CHECK_THROWS_AS(burr_cdf(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("burr_quantile inverts the cdf") {
  for (double p : {1e-8, 0.01, 0.3, 0.5, 0.95, 0.999, 1.0 - 1e-9}) {
    for (auto [a, t] : {std::pair{3.0, 2.0}, {0.5, 0.5}, {1e6, 3.0}, {2.0, 1e6}}) {
      const double x = burr_quantile(p, a, t);
      const double err = p > 0.5 ? std::fabs(burr_sf(x, a, t) - (1.0 - p))
                                 : std::fabs(burr_cdf(x, a, t) - p);
      CHECK(err <= 1e-9 * std::max(1e-3, std::min(p, 1 - p)));
    }
  }
  CHECK_THROWS_AS(burr_quantile(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(burr_quantile(1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("transforms") {
  SUBCASE("identity at unit parameters") {
    const ParamVector unit{3.0, 2.0, 1.0, 1.0, 1.0, 1.0};
    for (double x : {1e-6, 0.3, 1.0, 42.0}) {
      CHECK(forward_transform(x, unit) == doctest::Approx(x).epsilon(1e-14));
    }
  }
  SUBCASE("hand-evaluated power") {
    const ParamVector phi{3.0, 2.0, 2.0, 1.0, 2.0, 1.0};
    CHECK(forward_transform(1.0, phi) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(inverse_transform(6.0, phi) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("eta = 1 matches the printed inverse") {
    const ParamVector phi{3.0, 2.0, 1.7, 2.5, 1.3, 1.0};
    for (double z : {0.01, 1.0, 30.0}) {
      const double printed = (std::pow(z / phi.beta + 1.0, 1.0 / phi.gamma) - 1.0) * phi.tau;
      CHECK(inverse_transform(z, phi) == doctest::Approx(printed).epsilon(1e-13));
    }
  }
  SUBCASE("random round trips") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> logu(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const ParamVector phi{std::exp(logu(gen)), std::exp(logu(gen)), std::exp(logu(gen)),
                            std::exp(logu(gen)), std::exp(0.5 * logu(gen)),
                            std::exp(0.3 * logu(gen))};
      const double x = std::exp(logu(gen));
      const double back = inverse_transform(forward_transform(x, phi), phi);
      CHECK(back == doctest::Approx(x).epsilon(1e-10));
      const double z = std::exp(logu(gen));
      CHECK(forward_transform(inverse_transform(z, phi), phi) == doctest::Approx(z).epsilon(1e-10));
    }
  }
  SUBCASE("strictly increasing") {
    double prev = 0.0;
    for (double x = 1e-5; x < 1e5; x *= 1.3) {
      const double z = forward_transform(x, kTableSix);
      CHECK(z > prev);
      prev = z;
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(inverse_transform(0.0, kTableSix), DomainError);
    CHECK_THROWS_AS(forward_transform(1e300, ParamVector{1, 1, 1, 1e-300, 50, 2}), NumericError);
  }
}

TEST_CASE("powerburr_log_pdf") {
  SUBCASE("reduces to Burr at unit transform") {
    std::mt19937_64 gen(11);
    std::exponential_distribution<double> e(0.5);
    const ParamVector phi{3.0, 2.0, 1.0, 1.0, 1.0, 1.0};
    for (int i = 0; i < 100; ++i) {
      const double z = e(gen) + 1e-9;
      CHECK(powerburr_log_pdf(z, phi) == doctest::Approx(burr_log_pdf(z, 3.0, 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("40-digit reference values") {
    CHECK(powerburr_log_pdf(1.0, {3, 2, 1, 1, 1, 1}) ==
          doctest::Approx(-0.88015168525828186975).epsilon(1e-13));
    CHECK(powerburr_log_pdf(1.7, kTableSix) == doctest::Approx(-2.2886541241954774279).epsilon(1e-13));
    CHECK(powerburr_log_pdf(0.3, {5, 0.7, 1.5, 2, 0.8, 1.4}) ==
          doctest::Approx(-0.45085697996797899134).epsilon(1e-13));
  }
  SUBCASE("normalization") {
    const double total = integrate_density([](double z) { return powerburr_log_pdf(z, kTableSix); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("density point carries the back-transformed coordinate") {
    const DensityPoint pt = evaluate_density(2.5, kTableSix);
    CHECK(pt.x == doctest::Approx(inverse_transform(2.5, kTableSix)).epsilon(1e-14));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(powerburr_log_pdf(0.0, kTableSix), DomainError);
    // (1 + z/beta)^(1/gamma) - 1 underflows: reported, not clamped
    CHECK_THROWS_AS(powerburr_log_pdf(1e-300, ParamVector{2, 2, 1e300, 1, 1, 1}), NumericError);
  }
}

TEST_CASE("normalization holds for every study parameter row") {
  for (FamilyKind k : kAllFamilies) {
    const FamilySpec spec = study_parameters(k);
    const double total = integrate_density([&](double z) { return log_pdf(z, spec); });
    CAPTURE(spec.to_string());
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("family quantiles") {
  CHECK(quantile(0.95, FamilySpec(FamilyKind::Pareto, {3.0, 2.0})) ==
        doctest::Approx(3.4288352331898126).epsilon(1e-12));
  CHECK(quantile(0.5, FamilySpec(FamilyKind::LogNormal, {-0.5, 1.0})) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  SUBCASE("extended Pareto 99% quantile against sampling") {
    const FamilySpec ep(FamilyKind::ExtendedPareto, {3.0, 2.0, 1.0});
    const double q = quantile(0.99, ep);
    // scipy.stats.f.ppf(0.99, 4, 6)
    CHECK(q == doctest::Approx(9.14830103022785).epsilon(1e-9));
    RngStream stream(2024, 0);
    std::vector<double> xs(2'000'000);
    for (double& x : xs) x = draw_family(stream, ep);
    const double emp = testing::empirical_quantile(xs, 0.99);
    // sd of the order statistic: sqrt(p(1-p)/n) / f(q)
    const double se = std::sqrt(0.99 * 0.01 / xs.size()) / std::exp(log_pdf(q, ep));
    CHECK(std::fabs(emp - q) < 3.0 * se);
  }

  SUBCASE("cdf(quantile(p)) = p for every family") {
    for (FamilyKind k : kAllFamilies) {
      const FamilySpec spec = study_parameters(k);
      for (double p : {0.01, 0.5, 0.95, 0.99, 0.9999}) {
        const double q = quantile(p, spec);
        CAPTURE(spec.to_string());
        CAPTURE(p);
        CHECK(std::fabs(cdf(q, spec) - p) < 1e-9);
        CHECK(cdf(q, spec) + sf(q, spec) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("PowerBurr quantile is the transformed Burr quantile") {
    const ParamVector phi = kTableSix;
    const FamilySpec spec = FamilySpec::from_powerburr(FamilyKind::SixParam, phi);
    for (double p : {0.05, 0.5, 0.99}) {
      CHECK(quantile(p, spec) ==
            doctest::Approx(forward_transform(burr_quantile(p, phi.alpha, phi.theta), phi))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("moments") {
  SUBCASE("closed forms") {
    const auto pa = mean_sd(FamilySpec(FamilyKind::Pareto, {3.0, 2.0}));
    REQUIRE(pa);
    CHECK(pa->mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pa->sd == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(*moment(FamilySpec(FamilyKind::LogNormal, {-0.5, 1.0}), 1) == doctest::Approx(1.0));
  }
  SUBCASE("quadrature agrees with the closed Burr moments") {
    // E(X^r) = Gamma(theta + r) Gamma(alpha - r) / (Gamma(theta) Gamma(alpha)) (alpha/theta)^r
    const ParamVector phi{5.0, 2.0, 1.0, 1.0, 1.0, 1.0};
    for (int r = 1; r <= 4; ++r) {
      const double exact = std::exp(std::lgamma(2.0 + r) + std::lgamma(5.0 - r) - std::lgamma(2.0) -
                                    std::lgamma(5.0) + r * std::log(2.5));
      CHECK(*powerburr_moment(phi, r) == doctest::Approx(exact).epsilon(1e-8));
    }
  }
  SUBCASE("finiteness boundary") {
    const ParamVector at{3.0, 2.0, 1.0, 1.0, 1.5, 2.0};  // r eta gamma = 3 = alpha
    CHECK_FALSE(powerburr_moment(at, 1).has_value());
    ParamVector inside = at;
    inside.alpha = 3.0 / 0.99;  // r eta gamma = 0.99 alpha
    const auto m = powerburr_moment(inside, 1);
    REQUIRE(m.has_value());
    CHECK(std::isfinite(*m));
    CHECK_FALSE(moment(FamilySpec(FamilyKind::Pareto, {3.0, 2.0}), 3).has_value());
  }
  SUBCASE("Monte Carlo cross-check") {
    const FamilySpec spec(FamilyKind::FiveParam, {4.0, 2.0, 2.7, 5.0, 1.3});
    RngStream stream(99, 3);
    std::vector<double> xs(1'000'000);
    for (double& x : xs) x = draw_family(stream, spec);
    const auto s = testing::summarize(xs);
    const double m1 = *moment(spec, 1);
    CHECK(std::fabs(s.mean - m1) < 5.0 * std::sqrt(s.var / xs.size()));
  }
}
