#include "catid/selfcheck.hpp"

#include "catid/dgp.hpp"
#include "catid/partial_id.hpp"
#include "catid/point_id.hpp"

#include <algorithm>
#include <cmath>

namespace catid {

bool SelfcheckReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult &p) { return p.passed(); });
}

namespace {

class Tracker {
public:
  Tracker(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  /// Records one case whose violation is `excess` (<= tolerance passes).
  void check(double excess) {
    ++result_.checked;
    if (!(excess <= result_.tolerance)) {
      ++result_.failed;
      result_.worst = std::max(result_.worst,
                               std::isfinite(excess) ? excess : 1e300);
    }
  }

  PropertyResult done() const { return result_; }

private:
  PropertyResult result_;
};

/// Amount by which value lies outside [lo, hi].
double outside(double value, double lo, double hi) {
  return std::max({0.0, lo - value, value - hi});
}

double coverage_excess(const IntervalBoundsd &b, const DgpDiagnostics &truth,
                       bool truncated) {
  double worst = 0.0;
  const auto &lo = truncated ? b.lower : b.raw_lower;
  const auto &hi = truncated ? b.upper : b.raw_upper;
  for (Eigen::Index k = 0; k < b.q(); ++k) {
    worst = std::max(worst, outside(truth.pi1(k), lo(1, k), hi(1, k)));
    worst = std::max(worst, outside(truth.pi0(k), lo(0, k), hi(0, k)));
  }
  return worst;
}

ObservedMomentsd oriented(const ObservedMomentsd &m) {
  return orient_instrument(m);
}

} // namespace

SelfcheckReport run_selfcheck(std::size_t count, std::uint64_t seed) {
  SelfcheckReport report;
  report.count = count;
  report.seed = seed;

  const auto similar = spec_grid({ProfileKind::similarity}, count, seed);
  const auto monotone = spec_grid({ProfileKind::monotonic}, count, seed + 1);
  const double kappa = 0.05;
  const auto bounded = spec_grid({ProfileKind::bounded, kappa}, count, seed + 2);
  const auto equal_gap =
      spec_grid({ProfileKind::equal_gap, 0.1}, count, seed + 3);

  Tracker recovery("point_recovery_similarity", 1e-10);
  Tracker testable("testable_implication_similarity", 0.0);
  Tracker omega("omega_consistency_similarity", 1e-10);
  for (const auto &spec : similar) {
    const auto m = exact_moments(spec);
    const auto truth = diagnostics(spec);
    const auto pd = identify_point(m);
    const auto om = oriented(m);
    double err = std::max((pd.raw_pi1 - truth.pi1).cwiseAbs().maxCoeff(),
                          (pd.raw_pi0 - truth.pi0).cwiseAbs().maxCoeff());
    const ZTabled cov1 =
        om.swapped_z ? truth.cov[1].rowwise().reverse().eval() : truth.cov[1];
    const ZTabled true_omega = cov1.topRows(m.q - 1);
    err = std::max(err, (pd.omega - true_omega).abs().maxCoeff());
    recovery.check(err);
    testable.check(pd.testable_ok[0] && pd.testable_ok[1] ? 0.0 : 1.0);
    omega.check(omega_consistency_residual(pd, m));
  }

  Tracker plug("plug_back_identity", 1e-10);
  for (std::size_t i = 0; i < 20 * count; ++i) {
    const auto m = random_moments(seed, i, 2 + i % 5);
    plug.check(plug_back_residual(identify_point(m), m));
  }

  Tracker mono_cov("monotonic_coverage", 1e-10);
  for (const auto &spec : monotone)
    mono_cov.check(coverage_excess(bounds_monotonic(oriented(exact_moments(spec))),
                                   diagnostics(spec), true));

  Tracker mono_point("monotonic_contains_point_similarity", 1e-10);
  Tracker manski_valid("manski_coverage", 1e-10);
  Tracker manski_nest("manski_contains_monotonic_contains_point", 1e-10);
  for (const auto &spec : similar) {
    const auto m = oriented(exact_moments(spec));
    const auto truth = diagnostics(spec);
    const auto mono = bounds_monotonic(m);
    const auto none = bounds_none(m);
    mono_point.check(coverage_excess(mono, truth, true));
    double nest = coverage_excess(mono, truth, false);
    for (Eigen::Index k = 0; k < m.q; ++k)
      for (int d = 0; d < 2; ++d) {
        nest = std::max(nest, none.raw_lower(d, k) - mono.raw_lower(d, k));
        nest = std::max(nest, mono.raw_upper(d, k) - none.raw_upper(d, k));
      }
    manski_nest.check(nest);
  }
  for (const auto *grid : {&similar, &monotone, &bounded})
    for (const auto &spec : *grid)
      manski_valid.check(coverage_excess(bounds_none(exact_moments(spec)),
                                         diagnostics(spec), true));

  Tracker bounded_cov("bounded_coverage", 1e-10);
  Tracker collapse("bounded_kappa0_collapse", 1e-12);
  Tracker nesting("bounded_nesting", 1e-12);
  const std::vector<double> grid = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
  for (const auto &spec : bounded) {
    const auto m = exact_moments(spec);
    bounded_cov.check(
        coverage_excess(bounds_bounded(m, kappa), diagnostics(spec), true));
    const auto pd = identify_point(m);
    const auto sweep = kappa_sweep(m, grid);
    const auto &b0 = sweep.front();
    collapse.check(std::max({(b0.raw_lower.row(1).transpose() - pd.raw_pi1.array()).abs().maxCoeff(),
                             (b0.raw_upper.row(0).transpose() - pd.raw_pi0.array()).abs().maxCoeff(),
                             (b0.raw_upper - b0.raw_lower).abs().maxCoeff()}));
    double worst = 0.0;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      worst = std::max(worst, (sweep[i].raw_lower - sweep[i - 1].raw_lower).maxCoeff());
      worst = std::max(worst, (sweep[i - 1].raw_upper - sweep[i].raw_upper).maxCoeff());
    }
    nesting.check(worst);
  }

  // Equal gaps: the truth is pi_dk* - delta_k for both arms, which is the
  // lower (delta > 0) or upper (delta < 0) endpoint at
  // kappa = |delta_k| |p1 - p0|.
  Tracker sharp("bounded_sharpness_equal_gap", 1e-9);
  for (const auto &spec : equal_gap) {
    const auto m = exact_moments(spec);
    const auto truth = diagnostics(spec);
    const double gap = std::abs(m.relevance());
    for (Eigen::Index k = 0; k + 1 < m.q; ++k) {
      const double delta = truth.delta(k, 0);
      const auto b = bounds_bounded(m, std::abs(delta) * gap);
      const auto &edge = delta >= 0.0 ? b.raw_lower : b.raw_upper;
      sharp.check(std::max(std::abs(edge(1, k) - truth.pi1(k)),
                           std::abs(edge(0, k) - truth.pi0(k))));
    }
  }

  report.properties = {recovery.done(),   testable.done(),   omega.done(),
                       plug.done(),       mono_cov.done(),   mono_point.done(),
                       manski_valid.done(), manski_nest.done(), bounded_cov.done(),
                       collapse.done(),   nesting.done(),    sharp.done()};
  return report;
}

} // namespace catid
