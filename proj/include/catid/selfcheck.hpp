#ifndef CATID_SELFCHECK_HPP
#define CATID_SELFCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace catid {

struct PropertyResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failed = 0;
  /// Largest violation seen (0 when every case passed).
  double worst = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return failed == 0 && checked > 0; }
};

struct SelfcheckReport {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;

  bool all_passed() const;
};

/// Runs the oracle property suites on `count` random specs per profile.
SelfcheckReport run_selfcheck(std::size_t count, std::uint64_t seed);

} // namespace catid

#endif // CATID_SELFCHECK_HPP
