#ifndef VIMCO_ERRORS_HPP
#define VIMCO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vimco {

enum class ErrorKind {
  // dataset / validation
  DimensionMismatch,
  NotCentered,
  DegenerateColumn,
  TooFewRows,
  // numerical
  NonFiniteUpdate,
  NonFiniteElbo,
  SingularCovariance,
  ResidualCacheDrift,
  // oracle
  TooLarge,
  // file parsing
  BadMagic,
  TruncatedFile,
  MetaMismatch,
  UnknownSample,
  MissingValue,
  NonNumeric,
  IoFailure,
  // simulation
  InfeasiblePleiotropy,
  NoCausalSnp,
  // scoring
  NoPositives,
  // cli / config
  InvalidConfig,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Exit-code buckets used by the CLI: 1 usage, 2 data, 3 numerical.
inline bool is_numerical_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonFiniteUpdate:
    case ErrorKind::NonFiniteElbo:
    case ErrorKind::SingularCovariance:
    case ErrorKind::ResidualCacheDrift:
      return true;
    default:
      return false;
  }
}

inline bool is_usage_error(ErrorKind k) {
  return k == ErrorKind::InvalidConfig;
}

}  // namespace vimco

#endif
