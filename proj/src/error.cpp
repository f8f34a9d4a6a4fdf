#include "rsr/error.hpp"

namespace rsr {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::RankDeficient: return "RankDeficient";
  case Errc::DimensionError: return "DimensionError";
  case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
  case Errc::InvalidHyperparameter: return "InvalidHyperparameter";
  case Errc::SingularCovariance: return "SingularCovariance";
  case Errc::InvalidRank: return "InvalidRank";
  case Errc::RankTooLarge: return "RankTooLarge";
  case Errc::DegenerateOperator: return "DegenerateOperator";
  case Errc::FamilyMismatch: return "FamilyMismatch";
  case Errc::ShapeMismatch: return "ShapeMismatch";
  case Errc::NonFinite: return "NonFinite";
  case Errc::InsufficientDraws: return "InsufficientDraws";
  case Errc::ConfigError: return "ConfigError";
  case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace rsr
