#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "csac/math/autodiff.hpp"
#include "csac/math/rng.hpp"
#include "csac/math/tensor.hpp"

namespace csac::math {

enum class Activation : std::uint8_t { Gelu = 0, Relu = 1 };

std::string_view to_string(Activation a) noexcept;

struct DenseLayer {
  RealTensor weight;  // in x out
  RealTensor bias;    // 1 x out
};

/// Whether a recorded forward pass registers the net's weights as tape
/// parameters or treats them as constants (gradient still reaches the input).
enum class ParamMode { Track, Frozen };

/// Fully connected net: hidden layers use `activation`, the output layer is affine.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialised.
  Mlp(std::vector<std::size_t> widths, Activation activation);
  /// Uniform fan-in initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(std::vector<std::size_t> widths, Activation activation, SeededRng& rng);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_width() const noexcept { return widths_.front(); }
  std::size_t output_width() const noexcept { return widths_.back(); }
  Activation activation() const noexcept { return activation_; }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Inference pass; nothing is recorded. `input` is batch x in.
  RealTensor forward(const RealTensor& input) const;
  /// Recorded pass.
  Var forward(Tape& tape, Var input, ParamMode mode = ParamMode::Track);

  std::vector<RealTensor*> parameters();
  std::size_t parameter_count() const noexcept;
  void zero_grad();

  void copy_from(const Mlp& other);
  /// this <- tau * live + (1 - tau) * this
  void polyak_from(const Mlp& live, double tau);

  bool all_finite() const noexcept;
  bool same_architecture(const Mlp& other) const noexcept {
    return widths_ == other.widths_ && activation_ == other.activation_;
  }

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void validate_input(std::size_t width) const;

  std::vector<std::size_t> widths_;
  Activation activation_ = Activation::Gelu;
  std::vector<DenseLayer> layers_;
};

}  // namespace csac::math
