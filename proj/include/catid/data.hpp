#ifndef CATID_DATA_HPP
#define CATID_DATA_HPP

#include "catid/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace catid {

struct Record {
  std::uint32_t y = 0;
  std::uint8_t d = 0;
  std::uint8_t z = 0;
  std::optional<std::uint32_t> stratum;
  double weight = 1.0;

  friend bool operator==(const Record &, const Record &) = default;
};

/// Validated microdata. Immutable once constructed; the baseline category is
/// always the last entry of categories().
class Dataset {
public:
  /// Validates every record; throws Error on any invariant violation.
  Dataset(std::vector<std::string> categories, std::vector<Record> records,
          bool has_stratum = false, bool has_weight = false);

  const std::vector<Record> &records() const noexcept { return records_; }
  const std::vector<std::string> &categories() const noexcept {
    return categories_;
  }
  std::size_t q() const noexcept { return categories_.size(); }
  std::size_t size() const noexcept { return records_.size(); }
  bool has_stratum() const noexcept { return has_stratum_; }
  bool has_weight() const noexcept { return has_weight_; }

  /// Distinct stratum labels in ascending order; empty when unstratified.
  std::vector<std::uint32_t> strata() const;

  friend bool operator==(const Dataset &, const Dataset &) = default;

private:
  std::vector<std::string> categories_;
  std::vector<Record> records_;
  bool has_stratum_;
  bool has_weight_;
};

enum class Assumption { similarity, monotonic, bounded, none };

const char *to_string(Assumption a);
Assumption parse_assumption(const std::string &name);

struct EstimandConfig {
  Assumption assumption = Assumption::similarity;
  std::optional<double> kappa;
  double weak_iv_tolerance = kDefaultWeakIvTolerance;
  bool truncate = true;

  /// Throws Error(invalid_argument) when kappa is missing or outside [0, 0.5)
  /// for the bounded regime, or the tolerance is not positive.
  void validate() const;
};

struct LoadOptions {
  /// Explicit label ordering; labels outside it are rejected.
  std::optional<std::vector<std::string>> category_map;
  /// Label moved to the last position (the normalization category).
  std::optional<std::string> baseline;
};

Dataset load_dataset(std::istream &in, const LoadOptions &options = {});
Dataset load_dataset_file(const std::string &path,
                          const LoadOptions &options = {});

/// Writes the CSV schema read by load_dataset. Stratum and weight columns
/// are emitted iff the dataset carries them.
void save_dataset(const Dataset &ds, std::ostream &out);

struct SupportDiagnostic {
  enum class Severity { warning, error };
  Severity severity = Severity::warning;
  std::optional<std::uint32_t> stratum;
  std::string message;
};

/// Reports empty (y, d, z) cells, empty (d, z) treatment cells and missing
/// instrument variation, pooled and per stratum.
std::vector<SupportDiagnostic> validate_support(const Dataset &ds);

/// (d, z) record counts, pooled or restricted to one stratum.
std::array<std::array<std::size_t, 2>, 2>
treatment_counts(const Dataset &ds,
                 std::optional<std::uint32_t> stratum = std::nullopt);

} // namespace catid

#endif // CATID_DATA_HPP
