#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catid/dgp.hpp"
#include "catid/effects.hpp"
#include "catid/partial_id.hpp"
#include "catid/point_id.hpp"
#include "fixtures.hpp"

using namespace catid;
using fixtures::max_abs;
using fixtures::vec;

namespace {

PotentialDistributionsd from_marginals(const Vectord &pi1, const Vectord &pi0) {
  PotentialDistributionsd pd;
  pd.pi1 = pd.raw_pi1 = pi1;
  pd.pi0 = pd.raw_pi0 = pi0;
  return pd;
}

double calibrated_ate(double pi1, double pi0) {
  const auto ds = population_dataset(fixtures::binary_calibrated(pi1, pi0));
  return effects_point(identify_point(estimate_moments(ds))).ate(0);
}

} // namespace

TEST_CASE("binary marginals give the reported risk differences") {
  const auto e1 = effects_point(from_marginals(vec({0.9239, 0.0761}),
                                               vec({0.8696, 0.1304})));
  CHECK(std::abs(e1.ate(0) - 0.0543) <= 1e-12);
  const auto e2 = effects_point(from_marginals(vec({0.9713, 0.0287}),
                                               vec({0.9504, 0.0496})));
  CHECK(std::abs(e2.ate(0) - 0.0209) <= 1e-12);
}

TEST_CASE("calibrated populations reproduce the risk differences") {
  CHECK(std::abs(calibrated_ate(0.9239, 0.8696) - 0.0543) <= 1e-12);
  CHECK(std::abs(calibrated_ate(0.9713, 0.9504) - 0.0209) <= 1e-12);
}

TEST_CASE("null effect") {
  const auto pi = vec({0.2, 0.5, 0.3});
  const auto e = effects_point(from_marginals(pi, pi));
  CHECK(max_abs(e.ate) == 0.0);
  for (const auto &lo : e.log_odds) {
    REQUIRE(lo);
    CHECK(*lo == 0.0);
  }
  for (const auto &rr : e.rr)
    CHECK(*rr == 1.0);
}

TEST_CASE("boundary probabilities are flagged") {
  const auto e = effects_point(from_marginals(vec({0.5, 0.5, 0.0}),
                                              vec({0.0, 1.0, 0.0})));
  CHECK(!e.rr[0]);
  CHECK(!e.rr[2]);
  CHECK(e.rr[1]);
  CHECK(!e.log_odds[0]);
  CHECK(!e.log_odds[1]);
  CHECK(!e.log_odds[2]);
}

TEST_CASE("risk differences sum to zero") {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto pd = identify_point(random_moments(2, i, 2 + i % 5));
    const auto e = effects_point(pd);
    CHECK(std::abs(e.ate.sum()) <= 1e-10);
    CHECK(e.ate.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(std::abs(effects_point(pd, true).ate.sum()) <= 1e-10);
  }
}

TEST_CASE("raw mode and testable warning") {
  const auto pd = identify_point(exact_moments(fixtures::similarity_violation()));
  const auto t = effects_point(pd);
  const auto r = effects_point(pd, true);
  CHECK(t.testable_warning);
  CHECK(r.used_raw);
  CHECK(!t.used_raw);
  CHECK(r.ate(0) != t.ate(0));
}

TEST_CASE("interval subtraction") {
  const auto b = bounds_monotonic(exact_moments(fixtures::dgp_b()));
  const auto e = effects_bounds(b);
  REQUIRE(e.ate_bounds);
  CHECK(e.ate_bounds->lower(0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(e.ate_bounds->upper(0) == doctest::Approx(0.38 / 0.6).epsilon(1e-12));
  CHECK(e.ate_bounds->lower(0) <= 0.3);
  CHECK(e.ate_bounds->upper(0) >= 0.3);
}

TEST_CASE("degenerate and widening intervals") {
  const auto m = exact_moments(fixtures::dgp_c());
  const auto point = effects_point(identify_point(m), true);
  const auto zero = effects_bounds(bounds_bounded(m, 0.0));
  CHECK(max_abs(zero.ate_bounds->raw_lower - point.ate) < 1e-12);
  CHECK(max_abs(zero.ate_bounds->raw_upper - point.ate) < 1e-12);
  EffectEstimatesd prev = zero;
  for (double kappa : {0.01, 0.03, 0.1, 0.3, 0.49}) {
    const auto e = effects_bounds(bounds_bounded(m, kappa));
    CHECK((e.ate_bounds->lower.array() <= prev.ate_bounds->lower.array() + 1e-15).all());
    CHECK((e.ate_bounds->upper.array() >= prev.ate_bounds->upper.array() - 1e-15).all());
    CHECK(e.ate_bounds->lower.minCoeff() >= -1.0);
    CHECK(e.ate_bounds->upper.maxCoeff() <= 1.0);
    prev = e;
  }
}

TEST_CASE("true effects lie in bounded-association effect bounds") {
  const double kappa = 0.05;
  for (const auto &spec : spec_grid({ProfileKind::bounded, kappa}, 30, 77)) {
    const auto truth = diagnostics(spec);
    const auto e = effects_bounds(bounds_bounded(exact_moments(spec), kappa));
    for (Eigen::Index k = 0; k + 1 < truth.pi1.size(); ++k) {
      const double ate = truth.pi1(k) - truth.pi0(k);
      CHECK(e.ate_bounds->lower(k) <= ate + 1e-10);
      CHECK(ate <= e.ate_bounds->upper(k) + 1e-10);
    }
  }
}
