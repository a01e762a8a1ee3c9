#ifndef CATID_TESTS_FIXTURES_HPP
#define CATID_TESTS_FIXTURES_HPP

#include "catid/data.hpp"
#include "catid/dgp.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fixtures {

inline catid::Vectord vec(std::initializer_list<double> v) {
  catid::Vectord out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

/// One latent type: outcomes independent of take-up.
inline catid::DgpSpec dgp_a() {
  catid::DgpSpec s;
  s.categories = {"c1", "c2", "c3"};
  s.types = {{1.0, 0.2, 0.6, vec({0.2, 0.5, 0.3}), vec({0.5, 0.3, 0.2})}};
  return s;
}

/// Two types with equal hi-lo outcome gaps in both arms.
inline catid::DgpSpec dgp_b() {
  catid::DgpSpec s;
  s.categories = {"c1", "c2", "c3"};
  s.types = {{0.5, 0.4, 0.8, vec({0.3, 0.35, 0.35}), vec({0.6, 0.2, 0.2})},
             {0.5, 0.0, 0.4, vec({0.1, 0.45, 0.45}), vec({0.4, 0.3, 0.3})}};
  return s;
}

/// dgp_b with the hi type's treated c1 probability raised to 0.8.
inline catid::DgpSpec dgp_c() {
  auto s = dgp_b();
  s.types[0].py1 = vec({0.8, 0.2, 0.0});
  return s;
}

/// Binary-outcome population whose point estimates are exactly
/// P(Y1 = good) = pi1 and P(Y0 = good) = pi0.
inline catid::DgpSpec binary_calibrated(double pi1, double pi0) {
  catid::DgpSpec s;
  s.categories = {"good", "bad"};
  s.types = {{1.0, 0.3, 0.7, vec({pi0, 1.0 - pi0}), vec({pi1, 1.0 - pi1})}};
  return s;
}

/// Opposite-sign outcome gaps across arms with strongly heterogeneous take-up:
/// the closed-form solve returns a negative P(Y1 = c1).
inline catid::DgpSpec similarity_violation() {
  catid::DgpSpec s;
  s.categories = {"c1", "c2"};
  s.types = {{0.5, 0.1, 0.9, vec({1.0, 0.0}), vec({0.0, 1.0})},
             {0.5, 0.0, 0.1, vec({0.0, 1.0}), vec({1.0, 0.0})}};
  return s;
}

inline double max_abs(const Eigen::ArrayXXd &a) {
  return a.size() == 0 ? 0.0 : a.abs().maxCoeff();
}

} // namespace fixtures

#endif // CATID_TESTS_FIXTURES_HPP
