#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace daonmf {

// Dense row-major matrix of doubles. Entries may be signed; a matrix with
// zero rows or zero columns is a valid value.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Alias for documentation purposes: intermediate results that may be signed.
using RealMatrix = Matrix;

// Dense matrix whose entries are all finite and >= 0. The invariant is checked
// on construction and cannot be broken through the public interface.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;
  // Throws InvalidInput if any entry is negative or non-finite.
  explicit NonnegMatrix(Matrix m);
  NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return m_.rows(); }
  std::size_t cols() const noexcept { return m_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

  const Matrix& matrix() const noexcept { return m_; }
  operator const Matrix&() const noexcept { return m_; }
  Matrix release() && noexcept { return std::move(m_); }

  bool operator==(const NonnegMatrix&) const = default;

 private:
  Matrix m_;
};

bool all_finite(const Matrix& m) noexcept;
bool all_nonneg(const Matrix& m) noexcept;

// Elementwise max(m, 0). Throws InvalidInput on a non-finite entry.
NonnegMatrix project_nonneg(const Matrix& m);

// a * b, accumulated in i-k-j order. Throws DimError if a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix subtract(const Matrix& a, const Matrix& b);

double frobenius_sq(const Matrix& m);

// Sum over r != j of h_r^T h_j for the columns of h, i.e. the off-diagonal
// mass of h^T h.
double offdiag_gram_mass(const Matrix& h);

std::vector<double> column(const Matrix& m, std::size_t r);
void set_column(Matrix& m, std::size_t r, std::span<const double> v);
Matrix drop_column(const Matrix& m, std::size_t r);
// Inverse of drop_column: inserts v as the new column r.
Matrix insert_column(const Matrix& m, std::size_t r, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

// Scales every nonzero column of m to unit 2-norm; returns the original norms.
std::vector<double> normalize_columns(Matrix& m);

}  // namespace daonmf
