#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catid/inference.hpp"
#include "catid/json_io.hpp"
#include "catid/pipeline.hpp"
#include "fixtures.hpp"

using namespace catid;

namespace {

EstimandConfig point_config() {
  EstimandConfig cfg;
  cfg.assumption = Assumption::similarity;
  return cfg;
}

BootstrapConfig boot(std::size_t b, std::uint64_t seed, unsigned threads = 1) {
  BootstrapConfig cfg;
  cfg.replicates = b;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

} // namespace

TEST_CASE("type 7 quantiles") {
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(quantile_type7(x, 0.0) == 1.0);
  CHECK(quantile_type7(x, 1.0) == 4.0);
  CHECK(quantile_type7(x, 0.25) == doctest::Approx(1.75));
  CHECK(quantile_type7(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_type7(x, 0.9) == doctest::Approx(3.7));
  const std::vector<double> one = {5};
  CHECK(quantile_type7(one, 0.3) == 5.0);
  CHECK_THROWS_AS(quantile_type7(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("resampling preserves size and strata") {
  const auto ds = sample(fixtures::dgp_a(), 400, 0.5, 1);
  const auto m = resample_multiplicity(ds, 3, 0);
  std::size_t total = 0;
  for (auto c : m)
    total += c;
  CHECK(total == ds.size());
  CHECK(m == resample_multiplicity(ds, 3, 0));
  CHECK(m != resample_multiplicity(ds, 3, 1));

  auto records = ds.records();
  for (std::size_t i = 0; i < records.size(); ++i)
    records[i].stratum = static_cast<std::uint32_t>(i % 3 == 0 ? 0 : 1);
  const Dataset strat(ds.categories(), records, true);
  const auto ms = resample_multiplicity(strat, 4, 2);
  std::size_t s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < ms.size(); ++i)
    (records[i].stratum == 0u ? s0 : s1) += ms[i];
  CHECK(s0 == 134);
  CHECK(s1 == 266);
}

TEST_CASE("same seed gives identical results, independent of threads") {
  const auto ds = sample(fixtures::dgp_a(), 1500, 0.5, 7);
  const auto est = point_estimand(ds, point_config());
  const auto a = bootstrap(ds, est, boot(200, 42, 1));
  const auto b = bootstrap(ds, est, boot(200, 42, 1));
  const auto c = bootstrap(ds, est, boot(200, 42, 4));
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(a).dump() == to_json(c).dump());
  CHECK((a.replicate_values.array() == c.replicate_values.array()).all());
  CHECK(to_json(a).dump() != to_json(bootstrap(ds, est, boot(200, 43))).dump());
  CHECK((a.ci_lower.array() <= a.ci_upper.array()).all());
  CHECK(a.replicates_used + a.replicates_skipped == 200);
  CHECK(a.components.size() == 9);
  CHECK(a.components[0] == "pi1[c1]");
}

TEST_CASE("wider level contains narrower level") {
  const auto ds = sample(fixtures::dgp_b(), 1000, 0.5, 8);
  auto r = bootstrap(ds, bounds_estimand(ds, [] {
                       EstimandConfig c;
                       c.assumption = Assumption::bounded;
                       c.kappa = 0.02;
                       return c;
                     }()),
                     boot(300, 5));
  percentile_intervals(r, 0.90);
  const Vectord lo90 = r.ci_lower, hi90 = r.ci_upper;
  percentile_intervals(r, 0.99);
  CHECK((r.ci_lower.array() <= lo90.array()).all());
  CHECK((r.ci_upper.array() >= hi90.array()).all());
}

TEST_CASE("constant-within-cell data collapses the interval") {
  // Y determined by D: P(Y1 = a) = 1 and P(Y0 = a) = 0 in every resample.
  std::vector<Record> rs;
  for (int i = 0; i < 60; ++i) {
    const std::uint8_t z = i % 2;
    const std::uint8_t d = (i % 5 < (z ? 3 : 1)) ? 1 : 0;
    rs.push_back({d ? 0u : 1u, d, z});
  }
  const Dataset ds({"a", "b"}, rs);
  const auto r = bootstrap(ds, point_estimand(ds, point_config()), boot(99, 3));
  const double slack = 1e-12;
  CHECK((r.ci_upper - r.ci_lower).cwiseAbs().maxCoeff() < slack);
  CHECK((r.ci_lower - r.point).cwiseAbs().maxCoeff() < slack);
}

TEST_CASE("degenerate replicates are counted") {
  const auto ds = sample(fixtures::dgp_a(), 100, 0.5, 2);
  Estimand flaky;
  flaky.name = "flaky";
  flaky.components = {"x"};
  flaky.evaluate = [](const Dataset &, std::span<const std::uint32_t> m) {
    if (m[0] == 0 && m[1] == 0)
      throw WeakInstrumentError(0.3, 0.3, 0.01);
    if (m[0] == 0 && m[1] == 1)
      return Vectord::Constant(1, std::nan(""));
    return Vectord::Constant(1, double(m[0]));
  };
  const auto r = bootstrap(ds, flaky, boot(500, 11, 3));
  CHECK(r.replicates_used + r.replicates_skipped == 500);
  CHECK(r.skip_reasons.at("weak_instrument") > 0);
  CHECK(r.skip_reasons.at("non_finite") > 0);
  std::size_t total = 0;
  for (const auto &[k, v] : r.skip_reasons)
    total += v;
  CHECK(total == r.replicates_skipped);

  auto fail = boot(500, 11);
  fail.on_degenerate = OnDegenerate::fail;
  CHECK_THROWS_AS(bootstrap(ds, flaky, fail), WeakInstrumentError);

  Estimand broken = flaky;
  broken.evaluate = [](const Dataset &ds, std::span<const std::uint32_t> m) {
    if (m.size() == ds.size() && m[0] == 1 && m[1] == 1 && m[2] == 1 &&
        m[3] == 1 && m[4] == 1 && m[5] == 1 && m[6] == 1 && m[7] == 1)
      return Vectord::Constant(1, 0.0);
    throw Error(ErrorKind::weak_instrument, "always");
  };
  CHECK_THROWS_AS(bootstrap(ds, broken, boot(50, 1)), Error);
}

TEST_CASE("replicate fault isolation on a weak instrument") {
  // p0 = 0.40, p1 = 0.47 on 100 records each: resampled gaps often fall
  // below the tolerance.
  std::vector<Record> rs;
  for (int i = 0; i < 200; ++i) {
    const std::uint8_t z = i < 100 ? 0 : 1;
    const std::uint8_t d = (i % 100) < (z ? 47 : 40) ? 1 : 0;
    rs.push_back({static_cast<std::uint32_t>(i % 3 == 0), d, z});
  }
  const Dataset ds({"a", "b"}, rs);
  auto cfg = point_config();
  cfg.weak_iv_tolerance = 0.05;
  const auto r = bootstrap(ds, point_estimand(ds, cfg), boot(300, 9));
  CHECK(r.replicates_skipped > 0);
  CHECK(r.skip_reasons.at("weak_instrument") == r.replicates_skipped);
}

TEST_CASE("config validation and support precondition") {
  auto cfg = boot(0, 1);
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = boot(10, 1);
  cfg.ci_level = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  std::vector<Record> rs = {{0, 0, 0, 0u}, {1, 1, 1, 0u}, {0, 1, 1, 1u},
                            {1, 0, 1, 1u}};
  const Dataset ds({"a", "b"}, rs, true);
  CHECK_THROWS_AS(bootstrap(ds, point_estimand(ds, point_config()), boot(10, 1)),
                  Error);
}
