#ifndef CATID_INFERENCE_HPP
#define CATID_INFERENCE_HPP

#include "catid/data.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace catid {

enum class OnDegenerate { skip, fail };

struct BootstrapConfig {
  std::size_t replicates = 999;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  OnDegenerate on_degenerate = OnDegenerate::skip;
  /// Worker threads; results do not depend on this value.
  unsigned threads = 1;

  void validate() const;
};

/// A scalar-vector functional of the data. evaluate() receives the record
/// multiplicities of one resample (all ones for the full sample) and throws
/// catid::Error for degenerate inputs.
struct Estimand {
  std::string name;
  std::vector<std::string> components;
  std::function<Vectord(const Dataset &, std::span<const std::uint32_t>)>
      evaluate;
};

struct BootstrapResult {
  std::string estimand;
  std::vector<std::string> components;
  Vectord point;
  Vectord ci_lower, ci_upper;
  double ci_level = 0.95;
  std::size_t replicates_used = 0;
  std::size_t replicates_skipped = 0;
  std::map<std::string, std::size_t> skip_reasons;
  /// replicate_values(r, j): component j of the r-th used replicate, in
  /// replicate-index order.
  Eigen::MatrixXd replicate_values;
};

/// Linear interpolation between order statistics (type 7):
/// h = (n - 1) prob, x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_type7(std::span<const double> sorted, double prob);

/// Record multiplicities of replicate r: n draws with replacement, within
/// each stratum when the dataset is stratified (stratum sizes preserved).
std::vector<std::uint32_t> resample_multiplicity(const Dataset &ds,
                                                 std::uint64_t seed,
                                                 std::uint64_t replicate);

/// Percentile interval at ci_level from the replicate matrix of a result.
void percentile_intervals(BootstrapResult &result, double ci_level);

BootstrapResult bootstrap(const Dataset &ds, const Estimand &estimand,
                          const BootstrapConfig &cfg);

} // namespace catid

#endif // CATID_INFERENCE_HPP
