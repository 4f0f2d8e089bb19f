#include <doctest.h>

#include <cmath>
#include <random>

#include "powerburr/distributions.hpp"
#include "test_support.hpp"

using namespace powerburr;

using testing::count_modes;

TEST_CASE("unimodality verdicts") {
  SUBCASE("gamma >= 1") {
    const auto v = unimodality_check({5, 1, 1.5, 1, 1, 1});
    CHECK(v.is_guaranteed_unimodal);
    CHECK(v.condition_used == UnimodalityCondition::GammaGeOne);
  }
  SUBCASE("theta >= 1 with gamma < 1 and eta = 1") {
    const auto v = unimodality_check({3, 1.5, 1, 2, 0.4, 1});
    CHECK(v.is_guaranteed_unimodal);
    CHECK(v.condition_used == UnimodalityCondition::ThetaGeOne);
  }
  SUBCASE("quadratic criterion") {
    // alpha(1 - gamma/theta) - tau(1 + alpha) is negative here
    const auto v = unimodality_check({2, 0.5, 1, 3, 0.9, 1});
    CHECK(v.condition_used == UnimodalityCondition::Algebraic);
  }
  SUBCASE("no guarantee off eta = 1") {
    const auto v = unimodality_check({2, 0.5, 1, 0.01, 0.5, 1.3});
    CHECK_FALSE(v.is_guaranteed_unimodal);
    CHECK(v.condition_used == UnimodalityCondition::NotGuaranteed);
  }
}

TEST_CASE("grid scan detects a genuine second mode") {
  const ParamVector phi{5, 0.5, 1, 0.01, 0.1, 1};
  REQUIRE_FALSE(unimodality_check(phi).is_guaranteed_unimodal);
  CHECK(count_modes(phi) == 2);
}

TEST_CASE("guaranteed verdicts never contradict the grid scan") {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> lu(-2.0, 2.0);
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 100'000) {
    ++attempts;
    ParamVector phi{std::exp(lu(gen)), std::exp(lu(gen)), std::exp(lu(gen)),
                    std::exp(lu(gen)), std::exp(0.5 * lu(gen)), 1.0};
    if (attempts % 2 == 0) phi.eta = std::exp(0.3 * lu(gen));
    const auto v = unimodality_check(phi);
    if (!v.is_guaranteed_unimodal) continue;
    ++checked;
    CAPTURE(phi.alpha);
    CAPTURE(phi.theta);
    CAPTURE(phi.tau);
    CAPTURE(phi.gamma);
    CAPTURE(phi.eta);
    CHECK(count_modes(phi) <= 1);
  }
  CHECK(checked == 100);
}
