#ifndef CATID_PARTIAL_ID_HPP
#define CATID_PARTIAL_ID_HPP

#include "catid/point_id.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace catid {

enum class BoundsRegime { none, monotonic, bounded };

inline const char *to_string(BoundsRegime r) {
  switch (r) {
  case BoundsRegime::none:
    return "none";
  case BoundsRegime::monotonic:
    return "monotonic";
  case BoundsRegime::bounded:
    return "bounded";
  }
  return "unknown";
}

/// Per-arm, per-category intervals. Row d of each table is arm d.
template <typename Scalar>
struct IntervalBounds {
  BoundsRegime regime = BoundsRegime::none;
  std::optional<double> kappa;
  ArmTable<Scalar> raw_lower, raw_upper;
  /// Raw intervals clipped to [0, 1].
  ArmTable<Scalar> lower, upper;
  /// Raw lower > raw upper: the truncated interval collapses to the clipped
  /// midpoint and the entry is flagged as rejection evidence.
  Eigen::Array<bool, 2, Eigen::Dynamic> crossed;
  bool swapped_z = false;

  Eigen::Index q() const { return raw_lower.cols(); }
};

using IntervalBoundsd = IntervalBounds<double>;

namespace detail {

template <typename Scalar>
void truncate_bounds(IntervalBounds<Scalar> &b) {
  b.lower = b.raw_lower.max(Scalar(0)).min(Scalar(1));
  b.upper = b.raw_upper.max(Scalar(0)).min(Scalar(1));
  b.crossed = b.raw_lower > b.raw_upper;
  for (Eigen::Index k = 0; k < b.q(); ++k)
    for (int d = 0; d < 2; ++d)
      if (b.crossed(d, k)) {
        const Scalar mid = std::clamp(
            (b.raw_lower(d, k) + b.raw_upper(d, k)) / Scalar(2), Scalar(0),
            Scalar(1));
        b.lower(d, k) = b.upper(d, k) = mid;
      }
}

/// Baseline interval from the other categories: pi_q = 1 - sum_{k<q-1} pi_k.
template <typename Scalar>
void normalize_baseline(IntervalBounds<Scalar> &b) {
  const Eigen::Index q = b.q();
  for (int d = 0; d < 2; ++d) {
    const Scalar lower_sum = b.raw_lower.row(d).head(q - 1).sum();
    const Scalar upper_sum = b.raw_upper.row(d).head(q - 1).sum();
    b.raw_lower(d, q - 1) = Scalar(1) - upper_sum;
    b.raw_upper(d, q - 1) = Scalar(1) - lower_sum;
  }
}

template <typename Scalar>
IntervalBounds<Scalar> make_bounds(BoundsRegime regime, Eigen::Index q,
                                   bool swapped_z) {
  IntervalBounds<Scalar> b;
  b.regime = regime;
  b.swapped_z = swapped_z;
  b.raw_lower.resize(2, q);
  b.raw_upper.resize(2, q);
  return b;
}

inline void check_kappa(double kappa) {
  if (!(kappa >= 0.0 && kappa < 0.5))
    throw Error(ErrorKind::invalid_argument, "kappa must lie in [0, 0.5)");
}

/// Bounded-association intervals without the admissibility check on kappa.
template <typename Scalar>
IntervalBounds<Scalar> bounded_unchecked(const ObservedMoments<Scalar> &m,
                                         Scalar kappa) {
  const Eigen::Index q = m.q;
  const Scalar p0 = m.p(0), p1 = m.p(1);
  const Scalar gap = p1 - p0;
  auto b = make_bounds<Scalar>(BoundsRegime::bounded, q, m.swapped_z);
  const auto mu0 = m.mu.col(0), mu1 = m.mu.col(1);
  const auto a = mu1 * (Scalar(1) - p0) - mu0 * (Scalar(1) - p1);
  const auto bk = mu0 * p1 - mu1 * p0;
  b.raw_lower.row(1) = ((a - kappa) / gap).transpose();
  b.raw_upper.row(1) = ((a + kappa) / gap).transpose();
  b.raw_lower.row(0) = ((bk - kappa) / gap).transpose();
  b.raw_upper.row(0) = ((bk + kappa) / gap).transpose();
  normalize_baseline(b);
  truncate_bounds(b);
  return b;
}

} // namespace detail

/// Intervals implied by the data alone:
///   pi1k in [max_z joint(k,1,z), min_z joint(k,1,z) + 1 - p_z]
///   pi0k in [max_z joint(k,0,z), min_z joint(k,0,z) + p_z]
template <typename Scalar>
IntervalBounds<Scalar> bounds_none(const ObservedMoments<Scalar> &observed) {
  const auto m =
      observed.p(1) < observed.p(0) ? swap_instrument(observed) : observed;
  auto b = detail::make_bounds<Scalar>(BoundsRegime::none, m.q, m.swapped_z);
  const auto &j0 = m.joint[0];
  const auto &j1 = m.joint[1];
  b.raw_lower.row(1) = j1.rowwise().maxCoeff().transpose();
  b.raw_upper.row(1) = (j1.col(0) + (Scalar(1) - m.p(0)))
                           .min(j1.col(1) + (Scalar(1) - m.p(1)))
                           .transpose();
  b.raw_lower.row(0) = j0.rowwise().maxCoeff().transpose();
  b.raw_upper.row(0) =
      (j0.col(0) + m.p(0)).min(j0.col(1) + m.p(1)).transpose();
  detail::truncate_bounds(b);
  return b;
}

/// Monotonic-association intervals for oriented moments (p1 > p0), with the
/// closed forms
///   lower pi1k = (mu1 - mu0) / (p1 - p0)
///   upper pi1k = min{1, mu1 / p1}
///   lower pi0k = max{0, (mu0 - p1 upper pi1k) / (1 - p1)}   (0 when p1 = 1)
///   upper pi0k = (mu0 - p0 lower pi1k) / (1 - p0)
/// and the baseline interval by normalization.
template <typename Scalar>
IntervalBounds<Scalar> bounds_monotonic(const ObservedMoments<Scalar> &m) {
  const Scalar p0 = m.p(0), p1 = m.p(1);
  if (!(p1 > p0))
    throw Error(ErrorKind::invalid_argument,
                "monotonic bounds require oriented moments with p1 > p0");
  const Eigen::Index q = m.q;
  auto b = detail::make_bounds<Scalar>(BoundsRegime::monotonic, q, m.swapped_z);
  for (Eigen::Index k = 0; k + 1 < q; ++k) {
    const Scalar mu0 = m.mu(k, 0), mu1 = m.mu(k, 1);
    const Scalar lower1 = (mu1 - mu0) / (p1 - p0);
    const Scalar upper1 = std::min(Scalar(1), mu1 / p1);
    const Scalar lower0 =
        p1 < Scalar(1)
            ? std::max(Scalar(0), (mu0 - p1 * upper1) / (Scalar(1) - p1))
            : Scalar(0);
    const Scalar upper0 = (mu0 - p0 * lower1) / (Scalar(1) - p0);
    b.raw_lower(1, k) = lower1;
    b.raw_upper(1, k) = upper1;
    b.raw_lower(0, k) = lower0;
    b.raw_upper(0, k) = upper0;
  }
  detail::normalize_baseline(b);
  detail::truncate_bounds(b);
  return b;
}

/// Bounded-association intervals
///   pi1k in [(A_k -+ kappa) / (p1 - p0)],  A_k = mu1 (1 - p0) - mu0 (1 - p1)
///   pi0k in [(B_k -+ kappa) / (p1 - p0)],  B_k = mu0 p1 - mu1 p0
/// for k < q-1; baseline by normalization. Orients the instrument first.
template <typename Scalar>
IntervalBounds<Scalar> bounds_bounded(const ObservedMoments<Scalar> &observed,
                                      double kappa,
                                      double tolerance = kDefaultWeakIvTolerance) {
  detail::check_kappa(kappa);
  check_relevance(observed, tolerance);
  auto b = detail::bounded_unchecked(orient_instrument(observed), Scalar(kappa));
  b.kappa = kappa;
  return b;
}

/// One bounds_bounded result per grid value, in grid order. The grid must be
/// nonempty and nondecreasing.
template <typename Scalar>
std::vector<IntervalBounds<Scalar>>
kappa_sweep(const ObservedMoments<Scalar> &m, const std::vector<double> &grid,
            double tolerance = kDefaultWeakIvTolerance) {
  if (grid.empty())
    throw Error(ErrorKind::invalid_argument, "kappa grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    detail::check_kappa(grid[i]);
    if (i > 0 && grid[i] < grid[i - 1])
      throw Error(ErrorKind::invalid_argument,
                  "kappa grid must be in ascending order");
  }
  std::vector<IntervalBounds<Scalar>> out;
  out.reserve(grid.size());
  for (const double kappa : grid)
    out.push_back(bounds_bounded(m, kappa, tolerance));
  return out;
}

/// Conservative ATE interval [lower1 - upper0, upper1 - lower0] for category k
/// from raw (untruncated) endpoints.
template <typename Scalar>
std::pair<Scalar, Scalar> raw_ate_interval(const IntervalBounds<Scalar> &b,
                                           Eigen::Index k) {
  return {b.raw_lower(1, k) - b.raw_upper(0, k),
          b.raw_upper(1, k) - b.raw_lower(0, k)};
}

/// Smallest kappa at which the bounded-association ATE interval for
/// category k reaches null_value:
///   kappa* = |p1 - p0| |ate_point - null_value| / 2,
/// since the raw ATE interval has half-width 2 kappa / |p1 - p0|.
/// Empty when the point estimate already equals null_value. The result may
/// exceed the admissible range [0, 0.5); callers report that separately.
template <typename Scalar>
std::optional<Scalar> breakdown_kappa(const ObservedMoments<Scalar> &observed,
                                      Eigen::Index k, Scalar null_value = 0,
                                      double tolerance = kDefaultWeakIvTolerance) {
  using std::abs;
  check_relevance(observed, tolerance);
  const auto m = orient_instrument(observed);
  const auto [pi0, pi1] = solve_marginals(m);
  Scalar ate = pi1(k) - pi0(k);
  if (k == m.q - 1) {
    ate = (Scalar(1) - pi1.head(m.q - 1).sum()) -
          (Scalar(1) - pi0.head(m.q - 1).sum());
  }
  const Scalar distance = abs(ate - null_value);
  if (distance == Scalar(0))
    return std::nullopt;
  Scalar halfwidth_rate = Scalar(2) / m.relevance();
  if (k == m.q - 1)
    halfwidth_rate *= Scalar(m.q - 1);
  return distance / halfwidth_rate;
}

/// Bisection on the raw bounded-association ATE interval; independent route
/// to breakdown_kappa. Searches kappa in [0, upper]; infinity when the
/// interval still excludes null_value at upper.
template <typename Scalar>
std::optional<Scalar>
breakdown_kappa_bisection(const ObservedMoments<Scalar> &observed,
                          Eigen::Index k, Scalar null_value = 0,
                          Scalar upper = Scalar(1), int iterations = 200,
                          double tolerance = kDefaultWeakIvTolerance) {
  check_relevance(observed, tolerance);
  const auto m = orient_instrument(observed);
  const auto contains = [&](Scalar kappa) {
    const auto [lo, hi] =
        raw_ate_interval(detail::bounded_unchecked(m, kappa), k);
    return lo <= null_value && null_value <= hi;
  };
  if (contains(Scalar(0)))
    return std::nullopt;
  if (!contains(upper))
    return std::numeric_limits<Scalar>::infinity();
  Scalar lo(0), hi = upper;
  for (int i = 0; i < iterations && hi - lo > Scalar(0); ++i) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (mid == lo || mid == hi)
      break;
    (contains(mid) ? hi : lo) = mid;
  }
  return hi;
}

} // namespace catid

#endif // CATID_PARTIAL_ID_HPP
