#ifndef CATID_MOMENTS_HPP
#define CATID_MOMENTS_HPP

#include "catid/data.hpp"
#include "catid/types.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>

namespace catid {

/// Observed probability objects consumed by every identification formula.
///
///   p(z)          = P(D = 1 | Z = z)
///   joint[d](k,z) = P(Y = c_k, D = d | Z = z)
///   mu(k,z)       = P(Y = c_k | Z = z) = joint[0](k,z) + joint[1](k,z)
template <typename Scalar>
struct ObservedMoments {
  Eigen::Index q = 0;
  ZPair<Scalar> p = ZPair<Scalar>::Zero();
  std::array<ZTable<Scalar>, 2> joint;
  ZTable<Scalar> mu;
  ZPair<double> n_z = ZPair<double>::Zero();
  bool swapped_z = false;

  /// Builds mu and p from the two joint tables.
  static ObservedMoments from_joint(const ZTable<Scalar> &untreated,
                                    const ZTable<Scalar> &treated) {
    ObservedMoments m;
    m.q = treated.rows();
    m.joint = {untreated, treated};
    m.mu = untreated + treated;
    m.p = treated.colwise().sum().transpose();
    return m;
  }

  Scalar relevance() const { return p(1) - p(0); }

  template <typename Other> ObservedMoments<Other> cast() const {
    ObservedMoments<Other> out;
    out.q = q;
    out.p = p.template cast<Other>();
    out.joint = {joint[0].template cast<Other>(),
                 joint[1].template cast<Other>()};
    out.mu = mu.template cast<Other>();
    out.n_z = n_z;
    out.swapped_z = swapped_z;
    return out;
  }

  friend bool operator==(const ObservedMoments &a, const ObservedMoments &b) {
    return a.q == b.q && (a.p == b.p).all() &&
           (a.joint[0] == b.joint[0]).all() &&
           (a.joint[1] == b.joint[1]).all() && (a.mu == b.mu).all() &&
           (a.n_z == b.n_z).all() && a.swapped_z == b.swapped_z;
  }
};

using ObservedMomentsd = ObservedMoments<double>;

/// Weighted relative frequencies, pooled or within one stratum. Cell totals
/// are accumulated independently of record order.
ObservedMomentsd
estimate_moments(const Dataset &ds,
                 std::optional<std::uint32_t> stratum = std::nullopt);

/// Same, with record i counted multiplicity[i] times (bootstrap replicates).
ObservedMomentsd
estimate_moments(const Dataset &ds, std::span<const std::uint32_t> multiplicity,
                 std::optional<std::uint32_t> stratum = std::nullopt);

/// Returns p1 - p0; throws WeakInstrumentError when |p1 - p0| < tolerance.
template <typename Scalar>
Scalar check_relevance(const ObservedMoments<Scalar> &m,
                       double tolerance = kDefaultWeakIvTolerance) {
  using std::abs;
  const Scalar gap = m.relevance();
  if (!(abs(gap) >= Scalar(tolerance)))
    throw WeakInstrumentError(static_cast<double>(m.p(0)),
                              static_cast<double>(m.p(1)), tolerance);
  return gap;
}

/// Relabels Z = 0 <-> Z = 1 and toggles swapped_z. An involution.
template <typename Scalar>
ObservedMoments<Scalar> swap_instrument(const ObservedMoments<Scalar> &m) {
  ObservedMoments<Scalar> out = m;
  out.p = m.p.reverse();
  for (int d = 0; d < 2; ++d)
    out.joint[d] = m.joint[d].rowwise().reverse();
  out.mu = m.mu.rowwise().reverse();
  out.n_z = m.n_z.reverse();
  out.swapped_z = !m.swapped_z;
  return out;
}

/// Returns moments with p1 > p0, swapping instrument labels if needed.
template <typename Scalar>
ObservedMoments<Scalar> orient_instrument(const ObservedMoments<Scalar> &m) {
  if (m.p(1) == m.p(0))
    throw Error(ErrorKind::weak_instrument,
                "cannot orient instrument: p1 == p0");
  return m.p(1) > m.p(0) ? m : swap_instrument(m);
}

} // namespace catid

#endif // CATID_MOMENTS_HPP
