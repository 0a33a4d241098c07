#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace csac::math {

/// Dense row-major tensor of doubles with an optional gradient buffer.
///
/// Rank 0 is a scalar, rank 1 a row vector and rank 2 a matrix. The autodiff
/// layer views every tensor as a (rows x cols) matrix: rank 0 -> 1x1,
/// rank 1 of length n -> 1xn.
class RealTensor {
 public:
  RealTensor() = default;
  explicit RealTensor(std::vector<std::size_t> shape, double fill = 0.0);
  RealTensor(std::vector<std::size_t> shape, std::vector<double> values);

  static RealTensor scalar(double v);
  static RealTensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static RealTensor row(std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  double item() const;

  bool has_grad() const noexcept { return !grad_.empty() || values_.empty(); }
  std::span<double> grad();
  std::span<const double> grad() const;
  void zero_grad();
  void drop_grad() noexcept { grad_.clear(); }

  bool same_shape(const RealTensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;

  friend bool operator==(const RealTensor& a, const RealTensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

}  // namespace csac::math
