#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csac/math/tensor.hpp"

namespace csac::math {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adam with bias correction. Moments are allocated to match the parameter
/// list given at construction; later calls must pass the same list.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<RealTensor* const> params, AdamConfig config);

  /// Applies one update from each parameter's grad. Throws NumericError and
  /// leaves every parameter untouched when any grad is non-finite.
  void step(std::span<RealTensor* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  const std::vector<RealTensor>& first_moments() const noexcept { return m_; }
  const std::vector<RealTensor>& second_moments() const noexcept { return v_; }

  // Restoration from a checkpoint.
  void restore(AdamConfig config, std::uint64_t steps, std::vector<RealTensor> m,
               std::vector<RealTensor> v);

  friend bool operator==(const AdamState&, const AdamState&) = default;

 private:
  AdamConfig config_{};
  std::uint64_t steps_ = 0;
  std::vector<RealTensor> m_;
  std::vector<RealTensor> v_;
};

}  // namespace csac::math
