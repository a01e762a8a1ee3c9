#ifndef CATID_DGP_HPP
#define CATID_DGP_HPP

#include "catid/data.hpp"
#include "catid/moments.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace catid {

/// A latent type T = t. Given T, (Y0, Y1) are independent of (D0, D1).
struct LatentType {
  double mass = 0.0;
  /// P(D_z = 1 | T = t) for z = 0, 1.
  double pd0 = 0.0, pd1 = 0.0;
  /// P(Y_d = c_k | T = t) for d = 0, 1.
  Vectord py0, py1;
};

/// Finite mixture of latent types with closed-form population moments.
struct DgpSpec {
  std::vector<std::string> categories;
  std::vector<LatentType> types;

  std::size_t q() const noexcept { return categories.size(); }
  ZPair<double> propensities() const;
  /// Throws Error(invalid_argument) naming the first violated invariant.
  void validate() const;
};

/// Default labels c1..cq.
std::vector<std::string> default_categories(std::size_t q);

struct DgpDiagnostics {
  Vectord pi0, pi1;
  ZPair<double> p;
  /// cov[d](k, z) = Cov(1{Y_d = c_k}, D_z).
  std::array<ZTabled, 2> cov;
  /// delta(k, z) = cov[1](k, z) - cov[0](k, z).
  ZTabled delta;
  bool similarity = false;
  bool monotonic = false;
  /// max_{k<q-1, z} |delta(k, z)|.
  double kappa_min = 0.0;
  /// max_{k<q-1} over both arms of the deviation in the numerators of the
  /// closed-form solve: |delta1 (1 - p0) - delta0 (1 - p1)| and
  /// |delta0 p1 - delta1 p0| (oriented). Zero deviation means the point
  /// formulas recover the truth; kappa_effective is the smallest kappa whose
  /// bounded-association intervals cover it.
  double kappa_effective = 0.0;
};

/// Exact population moments. n_z is reported as +infinity.
template <typename Scalar = double>
ObservedMoments<Scalar> exact_moments(const DgpSpec &spec) {
  spec.validate();
  const auto q = static_cast<Eigen::Index>(spec.q());
  ZTable<Scalar> untreated = ZTable<Scalar>::Zero(q, 2);
  ZTable<Scalar> treated = ZTable<Scalar>::Zero(q, 2);
  for (const auto &t : spec.types) {
    const Scalar w(t.mass);
    const Scalar pd[2] = {Scalar(t.pd0), Scalar(t.pd1)};
    for (Eigen::Index k = 0; k < q; ++k)
      for (int z = 0; z < 2; ++z) {
        treated(k, z) += w * Scalar(t.py1(k)) * pd[z];
        untreated(k, z) += w * Scalar(t.py0(k)) * (Scalar(1) - pd[z]);
      }
  }
  auto m = ObservedMoments<Scalar>::from_joint(untreated, treated);
  m.p = ZPair<Scalar>::Zero();
  for (const auto &t : spec.types) {
    m.p(0) += Scalar(t.mass) * Scalar(t.pd0);
    m.p(1) += Scalar(t.mass) * Scalar(t.pd1);
  }
  m.n_z.setConstant(std::numeric_limits<double>::infinity());
  return m;
}

DgpDiagnostics diagnostics(const DgpSpec &spec);

/// n i.i.d. draws of (T, Z, D_Z, Y_D). Record i depends only on (seed, i).
Dataset sample(const DgpSpec &spec, std::size_t n, double z_probability,
               std::uint64_t seed);

/// Population as a weighted dataset: one record per nonempty (y, d, z) cell,
/// weight P(Y = y, D = d, Z = z) under P(Z = 1) = z_probability.
Dataset population_dataset(const DgpSpec &spec, double z_probability = 0.5);

/// equal_gap: delta(k, 0) = delta(k, 1) for every k, with kappa_min <= kappa
/// (pd1_t - pd0_t constant across types). Used to probe interval endpoints.
enum class ProfileKind { similarity, monotonic, bounded, equal_gap };

struct GridProfile {
  ProfileKind kind = ProfileKind::similarity;
  double kappa = 0.0;
};

struct GridOptions {
  std::size_t q_min = 2, q_max = 6;
  /// Minimum |p1 - p0| of generated specs.
  double min_relevance = 0.05;
  /// Rejection budget per requested spec.
  std::size_t attempts_per_spec = 1000;
};

/// Random valid specs satisfying the profile, generated constructively from
/// a latent score s_t that both take-up propensities are nondecreasing in:
///   py0_t = b0 + g_t,  py1_t = b1 + g_t + a (s_t - E s)
/// with a = 0 (similarity), a_k >= 0 for k < q-1 (monotonic) or a scaled so
/// kappa_min <= kappa (bounded, equal_gap). Proposals failing validation or the profile
/// check are rejected.
std::vector<DgpSpec> spec_grid(GridProfile profile, std::size_t count,
                               std::uint64_t seed,
                               const GridOptions &options = {});

const char *to_string(ProfileKind kind);

/// Arbitrary valid observed moments (not necessarily generated by any DGP):
/// p_z drawn with |p1 - p0| >= min_relevance, each column of joint[d]
/// a scaled flat-Dirichlet draw. Depends only on (seed, index).
ObservedMomentsd random_moments(std::uint64_t seed, std::uint64_t index,
                                std::size_t q, double min_relevance = 0.05);

} // namespace catid

#endif // CATID_DGP_HPP
