#ifndef CATID_POINT_ID_HPP
#define CATID_POINT_ID_HPP

#include "catid/moments.hpp"

#include <algorithm>
#include <array>

namespace catid {

template <typename Scalar>
struct PotentialDistributions {
  /// Display vectors: raw values clipped to [0, 1] and renormalized.
  Vector<Scalar> pi1, pi0;
  /// First q-1 entries from the closed-form solve, baseline by normalization.
  Vector<Scalar> raw_pi1, raw_pi0;
  /// omega(k, z) for k < q-1, in the oriented instrument frame.
  ZTable<Scalar> omega;
  /// omega entries outside the covariance range [-1/4, 1/4].
  Eigen::Array<bool, Eigen::Dynamic, 2> omega_out_of_range;
  std::array<bool, 2> testable_ok{true, true};
  bool swapped_z = false;
  bool truncated = true;

  const Vector<Scalar> &arm(int d) const { return d == 1 ? pi1 : pi0; }
  const Vector<Scalar> &raw_arm(int d) const {
    return d == 1 ? raw_pi1 : raw_pi0;
  }
};

using PotentialDistributionsd = PotentialDistributions<double>;

/// Closed-form solution of the 2x2 system
///   mu_z^(k) = pi1k p_z + pi0k (1 - p_z),  z = 0, 1
/// for every category k. Symmetric in the instrument labels, so no
/// orientation is required.
template <typename Scalar>
std::array<Vector<Scalar>, 2> solve_marginals(const ObservedMoments<Scalar> &m) {
  const Scalar p0 = m.p(0), p1 = m.p(1);
  const Scalar gap = p1 - p0;
  const auto mu0 = m.mu.col(0), mu1 = m.mu.col(1);
  Vector<Scalar> pi1 = ((mu1 * (Scalar(1) - p0) - mu0 * (Scalar(1) - p1)) / gap)
                           .matrix();
  Vector<Scalar> pi0 = ((mu0 * p1 - mu1 * p0) / gap).matrix();
  return {pi0, pi1};
}

/// Clip to [0, 1] and rescale to unit sum.
template <typename Scalar>
Vector<Scalar> truncate_simplex(const Vector<Scalar> &raw) {
  Vector<Scalar> out = raw.array().max(Scalar(0)).min(Scalar(1)).matrix();
  const Scalar total = out.sum();
  if (total > Scalar(0))
    out /= total;
  return out;
}

/// First q-1 raw entries nonnegative and summing below one.
template <typename Scalar>
bool test_implication(const Vector<Scalar> &raw_pi) {
  const auto head = raw_pi.head(raw_pi.size() - 1);
  return (head.array() >= Scalar(0)).all() && head.sum() < Scalar(1);
}

template <typename Scalar>
std::array<bool, 2> test_implication(const PotentialDistributions<Scalar> &pd) {
  return {test_implication(pd.raw_pi0), test_implication(pd.raw_pi1)};
}

/// Point identification from observed moments under association similarity.
/// Orients the instrument first; throws WeakInstrumentError below tolerance.
template <typename Scalar>
PotentialDistributions<Scalar>
identify_point(const ObservedMoments<Scalar> &observed,
               double tolerance = kDefaultWeakIvTolerance,
               bool truncate = true) {
  check_relevance(observed, tolerance);
  const ObservedMoments<Scalar> m = orient_instrument(observed);
  const Eigen::Index q = m.q;
  auto [pi0, pi1] = solve_marginals(m);

  PotentialDistributions<Scalar> pd;
  pd.swapped_z = m.swapped_z;
  pd.truncated = truncate;
  pd.raw_pi1 = pi1;
  pd.raw_pi0 = pi0;
  pd.raw_pi1(q - 1) = Scalar(1) - pi1.head(q - 1).sum();
  pd.raw_pi0(q - 1) = Scalar(1) - pi0.head(q - 1).sum();

  pd.omega.resize(q - 1, 2);
  for (int z = 0; z < 2; ++z)
    pd.omega.col(z) =
        m.joint[1].col(z).head(q - 1) - pd.raw_pi1.head(q - 1).array() * m.p(z);
  pd.omega_out_of_range = pd.omega.abs() > Scalar(0.25);

  pd.testable_ok = test_implication(pd);
  pd.pi1 = truncate ? truncate_simplex(pd.raw_pi1) : pd.raw_pi1;
  pd.pi0 = truncate ? truncate_simplex(pd.raw_pi0) : pd.raw_pi0;
  return pd;
}

namespace detail {
template <typename Scalar>
ObservedMoments<Scalar> in_frame_of(const ObservedMoments<Scalar> &m,
                                    bool swapped_z) {
  return m.swapped_z == swapped_z ? m : swap_instrument(m);
}
} // namespace detail

/// max_{k<q-1, z} |mu_z^(k) - pi1k p_z - pi0k (1 - p_z)| using raw estimates.
template <typename Scalar>
Scalar plug_back_residual(const PotentialDistributions<Scalar> &pd,
                          const ObservedMoments<Scalar> &observed) {
  using std::abs;
  const auto m = detail::in_frame_of(observed, pd.swapped_z);
  Scalar worst(0);
  for (Eigen::Index k = 0; k + 1 < m.q; ++k)
    for (int z = 0; z < 2; ++z) {
      const Scalar fit =
          pd.raw_pi1(k) * m.p(z) + pd.raw_pi0(k) * (Scalar(1) - m.p(z));
      worst = std::max(worst, Scalar(abs(m.mu(k, z) - fit)));
    }
  return worst;
}

/// max_{k<q-1, z} |joint(k,0,z) - pi0k (1 - p_z) + omega_kz|. Zero when the
/// data were generated under association similarity; a model-fit diagnostic
/// otherwise.
template <typename Scalar>
Scalar omega_consistency_residual(const PotentialDistributions<Scalar> &pd,
                                  const ObservedMoments<Scalar> &observed) {
  using std::abs;
  const auto m = detail::in_frame_of(observed, pd.swapped_z);
  Scalar worst(0);
  for (Eigen::Index k = 0; k + 1 < m.q; ++k)
    for (int z = 0; z < 2; ++z) {
      const Scalar fit =
          pd.raw_pi0(k) * (Scalar(1) - m.p(z)) - pd.omega(k, z);
      worst = std::max(worst, Scalar(abs(m.joint[0](k, z) - fit)));
    }
  return worst;
}

} // namespace catid

#endif // CATID_POINT_ID_HPP
