#include "catid/pipeline.hpp"

#include <algorithm>

namespace catid {

namespace {

ObservedMomentsd oriented(ObservedMomentsd m) {
  return m.p(1) < m.p(0) ? swap_instrument(m) : m;
}

} // namespace

std::vector<StratumResult> scoped_moments(const Dataset &ds,
                                          std::span<const std::uint32_t> mult,
                                          const Scope &scope) {
  std::vector<StratumResult> out;
  if (scope.stratum || !ds.has_stratum()) {
    out.push_back(
        {scope.stratum, 1.0, oriented(estimate_moments(ds, mult, scope.stratum))});
    return out;
  }
  const auto labels = ds.strata();
  std::vector<double> mass(labels.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto &r = ds.records()[i];
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), *r.stratum) -
        labels.begin());
    const double w = static_cast<double>(mult[i]) * r.weight;
    mass[pos] += w;
    total += w;
  }
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (mass[s] == 0.0)
      throw Error(ErrorKind::empty_stratum,
                  "stratum " + std::to_string(labels[s]) + " has no records");
    out.push_back({labels[s], mass[s] / total,
                   oriented(estimate_moments(ds, mult, labels[s]))});
  }
  return out;
}

PointAnalysis analyze_point(const Dataset &ds,
                            std::span<const std::uint32_t> mult,
                            const EstimandConfig &cfg, const Scope &scope,
                            bool raw_effects) {
  cfg.validate();
  PointAnalysis a;
  a.strata = scoped_moments(ds, mult, scope);
  for (const auto &s : a.strata) {
    a.per_stratum.push_back(
        identify_point(s.moments, cfg.weak_iv_tolerance, cfg.truncate));
    const auto &pd = a.per_stratum.back();
    a.plug_back_residual =
        std::max(a.plug_back_residual, plug_back_residual(pd, s.moments));
    a.omega_residual =
        std::max(a.omega_residual, omega_consistency_residual(pd, s.moments));
  }
  if (a.per_stratum.size() == 1) {
    a.combined = a.per_stratum.front();
  } else {
    const auto q = static_cast<Eigen::Index>(ds.q());
    auto &c = a.combined;
    c.pi1 = c.pi0 = c.raw_pi1 = c.raw_pi0 = Vectord::Zero(q);
    c.truncated = cfg.truncate;
    c.omega.resize(0, 2);
    c.omega_out_of_range.resize(0, 2);
    for (std::size_t s = 0; s < a.per_stratum.size(); ++s) {
      const auto &pd = a.per_stratum[s];
      const double w = a.strata[s].share;
      c.pi1 += w * pd.pi1;
      c.pi0 += w * pd.pi0;
      c.raw_pi1 += w * pd.raw_pi1;
      c.raw_pi0 += w * pd.raw_pi0;
      c.testable_ok[0] = c.testable_ok[0] && pd.testable_ok[0];
      c.testable_ok[1] = c.testable_ok[1] && pd.testable_ok[1];
    }
  }
  a.effects = effects_point(a.combined, raw_effects);
  return a;
}

namespace {

IntervalBoundsd bounds_for(const ObservedMomentsd &m,
                           const EstimandConfig &cfg) {
  switch (cfg.assumption) {
  case Assumption::none:
    return bounds_none(m);
  case Assumption::monotonic:
    check_relevance(m, cfg.weak_iv_tolerance);
    return bounds_monotonic(m);
  case Assumption::bounded:
    return bounds_bounded(m, *cfg.kappa, cfg.weak_iv_tolerance);
  case Assumption::similarity:
    break;
  }
  throw Error(ErrorKind::invalid_argument,
              "bounds require assumption none, monotonic or bounded");
}

} // namespace

BoundsAnalysis analyze_bounds(const Dataset &ds,
                              std::span<const std::uint32_t> mult,
                              const EstimandConfig &cfg, const Scope &scope) {
  cfg.validate();
  BoundsAnalysis a;
  a.strata = scoped_moments(ds, mult, scope);
  for (const auto &s : a.strata)
    a.per_stratum.push_back(bounds_for(s.moments, cfg));

  if (a.per_stratum.size() == 1) {
    a.combined = a.per_stratum.front();
  } else {
    auto &c = a.combined;
    const auto q = static_cast<Eigen::Index>(ds.q());
    c = detail::make_bounds<double>(a.per_stratum.front().regime, q, false);
    c.kappa = a.per_stratum.front().kappa;
    c.raw_lower.setZero();
    c.raw_upper.setZero();
    c.lower = c.upper = ArmTabled::Zero(2, q);
    c.crossed = Eigen::Array<bool, 2, Eigen::Dynamic>::Constant(2, q, false);
    for (std::size_t s = 0; s < a.per_stratum.size(); ++s) {
      const auto &b = a.per_stratum[s];
      const double w = a.strata[s].share;
      c.raw_lower += w * b.raw_lower;
      c.raw_upper += w * b.raw_upper;
      c.lower += w * b.lower;
      c.upper += w * b.upper;
      c.crossed = c.crossed || b.crossed;
    }
  }
  a.effects = effects_bounds(a.combined);

  if (cfg.assumption == Assumption::bounded && a.strata.size() == 1) {
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(ds.q()); ++k)
      a.breakdown_kappa.push_back(breakdown_kappa(
          a.strata.front().moments, k, 0.0, cfg.weak_iv_tolerance));
  }
  return a;
}

namespace {

std::vector<std::string> labelled(const Dataset &ds,
                                  std::initializer_list<const char *> names) {
  std::vector<std::string> out;
  for (const char *name : names)
    for (const auto &c : ds.categories())
      out.push_back(std::string(name) + "[" + c + "]");
  return out;
}

} // namespace

Estimand point_estimand(const Dataset &ds, const EstimandConfig &cfg,
                        const Scope &scope, bool raw_effects) {
  cfg.validate();
  Estimand e;
  e.name = "point";
  e.components = labelled(ds, {"pi1", "pi0", "ate"});
  e.evaluate = [cfg, scope, raw_effects](const Dataset &data,
                                         std::span<const std::uint32_t> mult) {
    const auto a = analyze_point(data, mult, cfg, scope, raw_effects);
    const auto q = a.combined.pi1.size();
    const auto &pi1 = raw_effects ? a.combined.raw_pi1 : a.combined.pi1;
    const auto &pi0 = raw_effects ? a.combined.raw_pi0 : a.combined.pi0;
    Vectord v(3 * q);
    v << pi1, pi0, a.effects.ate;
    return v;
  };
  return e;
}

Estimand bounds_estimand(const Dataset &ds, const EstimandConfig &cfg,
                         const Scope &scope) {
  cfg.validate();
  Estimand e;
  e.name = std::string("bounds(") + to_string(cfg.assumption) +
           (cfg.kappa ? ", kappa=" + std::to_string(*cfg.kappa) : "") + ")";
  e.components = labelled(ds, {"lower_pi1", "upper_pi1", "lower_pi0",
                               "upper_pi0", "ate_lower", "ate_upper"});
  e.evaluate = [cfg, scope](const Dataset &data,
                            std::span<const std::uint32_t> mult) {
    const auto a = analyze_bounds(data, mult, cfg, scope);
    const auto &b = a.combined;
    const auto q = b.q();
    Vectord v(6 * q);
    v << b.lower.row(1).transpose(), b.upper.row(1).transpose(),
        b.lower.row(0).transpose(), b.upper.row(0).transpose(),
        a.effects.ate_bounds->lower, a.effects.ate_bounds->upper;
    return v;
  };
  return e;
}

Estimand effects_estimand(const Dataset &ds, const EstimandConfig &cfg,
                          const Scope &scope, bool raw_effects) {
  cfg.validate();
  Estimand e;
  e.name = "effects";
  e.components = labelled(ds, {"ate"});
  e.evaluate = [cfg, scope, raw_effects](const Dataset &data,
                                         std::span<const std::uint32_t> mult) {
    return Vectord(analyze_point(data, mult, cfg, scope, raw_effects).effects.ate);
  };
  return e;
}

} // namespace catid
