#include "csac/math/mlp.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "csac/errors.hpp"

namespace csac::math {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void check_widths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw DimensionError("Mlp needs at least input and output widths");
  for (auto w : widths) {
    if (w == 0) throw DimensionError("Mlp layer width must be positive");
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  return a == Activation::Gelu ? "gelu" : "relu";
}

Mlp::Mlp(std::vector<std::size_t> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation) {
  check_widths(widths_);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    layers_.push_back({RealTensor({widths_[l], widths_[l + 1]}), RealTensor({1, widths_[l + 1]})});
  }
}

Mlp::Mlp(std::vector<std::size_t> widths, Activation activation, SeededRng& rng)
    : Mlp(std::move(widths), activation) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    for (auto& w : layers_[l].weight.values()) w = rng.uniform(-bound, bound);
    for (auto& b : layers_[l].bias.values()) b = rng.uniform(-bound, bound);
  }
}

void Mlp::validate_input(std::size_t width) const {
  if (layers_.empty()) throw StateError("Mlp is empty");
  if (width != input_width()) {
    throw DimensionError("Mlp input width " + std::to_string(width) + " != expected " +
                         std::to_string(input_width()));
  }
}

RealTensor Mlp::forward(const RealTensor& input) const {
  validate_input(input.cols());
  const std::size_t batch = input.rows();
  RowMatrix h = ConstMap(input.data(), batch, input.cols());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    RowMatrix z = h * ConstMap(layer.weight.data(), layer.weight.rows(), layer.weight.cols());
    z.rowwise() += ConstMap(layer.bias.data(), 1, layer.bias.cols()).row(0);
    if (l + 1 < layers_.size()) {
      if (activation_ == Activation::Gelu) {
        z = z.unaryExpr([](double x) { return gelu_value(x); });
      } else {
        z = z.cwiseMax(0.0);
      }
    }
    h = std::move(z);
  }
  RealTensor out({batch, output_width()});
  MutMap(out.data(), batch, output_width()) = h;
  return out;
}

Var Mlp::forward(Tape& tape, Var input, ParamMode mode) {
  validate_input(tape.value(input).cols());
  Var h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    Var w = mode == ParamMode::Track ? tape.parameter(layer.weight) : tape.constant(layer.weight);
    Var b = mode == ParamMode::Track ? tape.parameter(layer.bias) : tape.constant(layer.bias);
    h = ad::add_bias(ad::matmul(h, w), b);
    if (l + 1 < layers_.size()) h = activation_ == Activation::Gelu ? ad::gelu(h) : ad::relu(h);
  }
  return h;
}

std::vector<RealTensor*> Mlp::parameters() {
  std::vector<RealTensor*> out;
  out.reserve(layers_.size() * 2);
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void Mlp::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

void Mlp::copy_from(const Mlp& other) {
  if (!same_architecture(other)) throw DimensionError("copy_from: architectures differ");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    std::ranges::copy(other.layers_[l].weight.values(), layers_[l].weight.values().begin());
    std::ranges::copy(other.layers_[l].bias.values(), layers_[l].bias.values().begin());
  }
}

void Mlp::polyak_from(const Mlp& live, double tau) {
  if (!same_architecture(live)) throw DimensionError("polyak_from: architectures differ");
  auto blend = [tau](std::span<double> target, std::span<const double> src) {
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = tau * src[i] + (1.0 - tau) * target[i];
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    blend(layers_[l].weight.values(), live.layers_[l].weight.values());
    blend(layers_[l].bias.values(), live.layers_[l].bias.values());
  }
}

bool Mlp::all_finite() const noexcept {
  return std::ranges::all_of(layers_, [](const DenseLayer& l) {
    return l.weight.all_finite() && l.bias.all_finite();
  });
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (!a.same_architecture(b)) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (!(a.layers_[l].weight == b.layers_[l].weight) || !(a.layers_[l].bias == b.layers_[l].bias)) {
      return false;
    }
  }
  return true;
}

}  // namespace csac::math
