#include "csac/math/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csac/errors.hpp"

namespace csac::math {

std::size_t shape_product(std::span<const std::size_t> shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

RealTensor::RealTensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(shape_product(shape_), fill) {
  if (rank() > 2) throw DimensionError("RealTensor supports rank <= 2");
}

RealTensor::RealTensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (rank() > 2) throw DimensionError("RealTensor supports rank <= 2");
  if (values_.size() != shape_product(shape_)) {
    throw DimensionError("RealTensor: " + std::to_string(values_.size()) +
                         " values do not fill shape of " +
                         std::to_string(shape_product(shape_)));
  }
}

RealTensor RealTensor::scalar(double v) { return RealTensor({}, std::vector<double>{v}); }

RealTensor RealTensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return RealTensor({rows, cols}, std::move(values));
}

RealTensor RealTensor::row(std::vector<double> values) {
  const auto n = values.size();
  return RealTensor({n}, std::move(values));
}

std::size_t RealTensor::rows() const noexcept { return rank() == 2 ? shape_[0] : 1; }

std::size_t RealTensor::cols() const noexcept {
  switch (rank()) {
    case 0: return 1;
    case 1: return shape_[0];
    default: return shape_[1];
  }
}

double RealTensor::item() const {
  if (values_.size() != 1) throw DimensionError("item() requires exactly one element");
  return values_[0];
}

std::span<double> RealTensor::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

std::span<const double> RealTensor::grad() const {
  if (grad_.size() != values_.size()) throw StateError("tensor has no gradient");
  return grad_;
}

void RealTensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

bool RealTensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace csac::math
