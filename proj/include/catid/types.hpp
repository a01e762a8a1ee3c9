#ifndef CATID_TYPES_HPP
#define CATID_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace catid {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Category-by-instrument table: row k is category c_k, column z is Z = z.
template <typename Scalar>
using ZTable = Eigen::Array<Scalar, Eigen::Dynamic, 2>;

/// Arm-by-category table: row d is the treatment arm, column k is c_k.
template <typename Scalar>
using ArmTable = Eigen::Array<Scalar, 2, Eigen::Dynamic>;

template <typename Scalar>
using ZPair = Eigen::Array<Scalar, 2, 1>;

using Vectord = Vector<double>;
using ZTabled = ZTable<double>;
using ArmTabled = ArmTable<double>;

enum class ErrorKind {
  validation,
  no_instrument_variation,
  empty_stratum,
  weak_instrument,
  invalid_argument,
  io,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class WeakInstrumentError : public Error {
public:
  WeakInstrumentError(double p0, double p1, double tolerance);

  double p0() const noexcept { return p0_; }
  double p1() const noexcept { return p1_; }
  double tolerance() const noexcept { return tolerance_; }

private:
  double p0_, p1_, tolerance_;
};

inline constexpr double kDefaultWeakIvTolerance = 0.01;

} // namespace catid

#endif // CATID_TYPES_HPP
