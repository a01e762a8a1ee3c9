#ifndef CATID_PIPELINE_HPP
#define CATID_PIPELINE_HPP

#include "catid/data.hpp"
#include "catid/effects.hpp"
#include "catid/inference.hpp"
#include "catid/moments.hpp"
#include "catid/partial_id.hpp"
#include "catid/point_id.hpp"

#include <optional>
#include <span>
#include <vector>

namespace catid {

/// Which part of the data an analysis runs on. Without a selected stratum a
/// stratified dataset is analysed within each stratum and the results are
/// averaged with the strata's weighted shares.
struct Scope {
  std::optional<std::uint32_t> stratum;
};

struct StratumResult {
  std::optional<std::uint32_t> stratum;
  double share = 1.0;
  /// Oriented so that p1 >= p0.
  ObservedMomentsd moments;
};

struct PointAnalysis {
  std::vector<StratumResult> strata;
  std::vector<PotentialDistributionsd> per_stratum;
  /// Equal to per_stratum[0] when one stratum is analysed; share-weighted
  /// average otherwise (omega left empty).
  PotentialDistributionsd combined;
  EffectEstimatesd effects;
  double plug_back_residual = 0.0;
  double omega_residual = 0.0;
};

struct BoundsAnalysis {
  std::vector<StratumResult> strata;
  std::vector<IntervalBoundsd> per_stratum;
  IntervalBoundsd combined;
  EffectEstimatesd effects;
  /// Per category; empty for stratified runs and for regimes other than
  /// bounded.
  std::vector<std::optional<double>> breakdown_kappa;
};

std::vector<StratumResult> scoped_moments(const Dataset &ds,
                                          std::span<const std::uint32_t> mult,
                                          const Scope &scope);

PointAnalysis analyze_point(const Dataset &ds,
                            std::span<const std::uint32_t> mult,
                            const EstimandConfig &cfg, const Scope &scope = {},
                            bool raw_effects = false);

/// cfg.assumption selects the regime (none, monotonic or bounded).
BoundsAnalysis analyze_bounds(const Dataset &ds,
                              std::span<const std::uint32_t> mult,
                              const EstimandConfig &cfg,
                              const Scope &scope = {});

/// Components pi1[c], pi0[c], ate[c] for every category label c.
Estimand point_estimand(const Dataset &ds, const EstimandConfig &cfg,
                        const Scope &scope = {}, bool raw_effects = false);

/// Components {lower,upper}_pi1[c], {lower,upper}_pi0[c], ate_{lower,upper}[c]
/// from the truncated intervals.
Estimand bounds_estimand(const Dataset &ds, const EstimandConfig &cfg,
                         const Scope &scope = {});

/// Components ate[c].
Estimand effects_estimand(const Dataset &ds, const EstimandConfig &cfg,
                          const Scope &scope = {}, bool raw_effects = false);

} // namespace catid

#endif // CATID_PIPELINE_HPP
