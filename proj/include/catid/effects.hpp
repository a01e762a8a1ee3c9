#ifndef CATID_EFFECTS_HPP
#define CATID_EFFECTS_HPP

#include "catid/partial_id.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace catid {

/// Conservative (interval-subtraction) ATE bounds; not shown to be sharp.
template <typename Scalar>
struct AteBounds {
  /// From the truncated arm intervals, clipped to [-1, 1].
  Vector<Scalar> lower, upper;
  /// From the raw arm intervals.
  Vector<Scalar> raw_lower, raw_upper;
};

template <typename Scalar>
struct EffectEstimates {
  /// pi1k - pi0k.
  Vector<Scalar> ate;
  /// pi1k / pi0k; empty where pi0k = 0.
  std::vector<std::optional<Scalar>> rr;
  /// logit(pi1k) - logit(pi0k); empty where either probability is 0 or 1.
  std::vector<std::optional<Scalar>> log_odds;
  std::optional<AteBounds<Scalar>> ate_bounds;
  bool used_raw = false;
  /// The testable implication failed for at least one arm.
  bool testable_warning = false;
};

using EffectEstimatesd = EffectEstimates<double>;

template <typename Scalar>
EffectEstimates<Scalar> effects_point(const PotentialDistributions<Scalar> &pd,
                                      bool use_raw = false) {
  using std::log;
  const Vector<Scalar> &pi1 = use_raw ? pd.raw_pi1 : pd.pi1;
  const Vector<Scalar> &pi0 = use_raw ? pd.raw_pi0 : pd.pi0;
  EffectEstimates<Scalar> e;
  e.used_raw = use_raw;
  e.testable_warning = !(pd.testable_ok[0] && pd.testable_ok[1]);
  e.ate = pi1 - pi0;
  const auto q = pi1.size();
  e.rr.resize(static_cast<std::size_t>(q));
  e.log_odds.resize(static_cast<std::size_t>(q));
  const auto interior = [](Scalar v) { return v > Scalar(0) && v < Scalar(1); };
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (pi0(k) > Scalar(0) && pi1(k) >= Scalar(0))
      e.rr[i] = pi1(k) / pi0(k);
    if (interior(pi1(k)) && interior(pi0(k)))
      e.log_odds[i] = log(pi1(k) / (Scalar(1) - pi1(k))) -
                      log(pi0(k) / (Scalar(1) - pi0(k)));
  }
  return e;
}

template <typename Scalar>
EffectEstimates<Scalar> effects_bounds(const IntervalBounds<Scalar> &b) {
  EffectEstimates<Scalar> e;
  AteBounds<Scalar> ab;
  ab.raw_lower = (b.raw_lower.row(1) - b.raw_upper.row(0)).transpose().matrix();
  ab.raw_upper = (b.raw_upper.row(1) - b.raw_lower.row(0)).transpose().matrix();
  ab.lower = (b.lower.row(1) - b.upper.row(0))
                 .max(Scalar(-1))
                 .min(Scalar(1))
                 .transpose()
                 .matrix();
  ab.upper = (b.upper.row(1) - b.lower.row(0))
                 .max(Scalar(-1))
                 .min(Scalar(1))
                 .transpose()
                 .matrix();
  e.ate_bounds = std::move(ab);
  return e;
}

} // namespace catid

#endif // CATID_EFFECTS_HPP
