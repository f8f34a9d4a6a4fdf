#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace rsr {

/// Seedable random stream with deterministic child streams.
///
/// `split(i)` derives a statistically independent stream from the parent key
/// and `i` without advancing the parent, so work handed to any thread in any
/// order reproduces the same numbers.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::uint64_t stream) const;
  std::uint64_t key() const noexcept { return key_; }

  double normal();
  double uniform();
  /// Gamma variate with unit rate.
  double gamma(double shape);
  /// Inverse-gamma variate with the shape/rate parameterization.
  double inverse_gamma(double shape, double rate);
  Eigen::VectorXd normal_vector(Eigen::Index n);
  /// Index drawn with the given (not necessarily normalized) weights.
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace rsr
