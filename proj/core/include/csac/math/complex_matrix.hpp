#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace csac::math {

using Complex = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill = {})
      : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix column(std::vector<Complex> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  const std::vector<Complex>& entries() const noexcept { return entries_; }

  ComplexMatrix col(std::size_t c) const;
  ComplexMatrix adjoint() const;
  ComplexMatrix operator*(const ComplexMatrix& rhs) const;
  ComplexMatrix operator-(const ComplexMatrix& rhs) const;

  /// Frobenius norm.
  double norm() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

/// Solves A x = b for Hermitian positive definite A (Cholesky, A = L L^H).
/// `b` may hold several right-hand-side columns. Throws NumericError when A is
/// not Hermitian or not positive definite, DimensionError on shape mismatch.
ComplexMatrix solve_hermitian(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace csac::math
