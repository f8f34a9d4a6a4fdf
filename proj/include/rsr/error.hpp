#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsr {

enum class Errc {
  RankDeficient,
  DimensionError,
  NotPositiveDefinite,
  InvalidHyperparameter,
  SingularCovariance,
  InvalidRank,
  RankTooLarge,
  DegenerateOperator,
  FamilyMismatch,
  ShapeMismatch,
  NonFinite,
  InsufficientDraws,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace rsr
