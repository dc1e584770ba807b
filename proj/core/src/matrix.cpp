#include "daonmf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "daonmf/error.hpp"

namespace daonmf {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_column_index(const Matrix& m, std::size_t r, std::size_t limit) {
  if (r >= limit) {
    throw IndexError("column index " + std::to_string(r) + " out of range for " + shape(m) +
                     " matrix");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimError("data length " + std::to_string(data_.size()) + " does not match " +
                   std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimError("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

NonnegMatrix::NonnegMatrix(Matrix m) : m_(std::move(m)) {
  if (!all_finite(m_)) throw InvalidInput("matrix has a non-finite entry");
  if (!all_nonneg(m_)) throw InvalidInput("matrix has a negative entry");
}

NonnegMatrix::NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : NonnegMatrix(Matrix(rows)) {}

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

bool all_nonneg(const Matrix& m) noexcept {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v >= 0.0; });
}

NonnegMatrix project_nonneg(const Matrix& m) {
  if (!all_finite(m)) throw InvalidInput("project_nonneg: non-finite entry");
  Matrix out = m;
  for (double& v : out.data()) v = std::max(v, 0.0);
  return NonnegMatrix(std::move(out));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimError("matmul: " + shape(a) + " times " + shape(b));
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimError("matmul_tn: transpose of " + shape(a) + " times " + shape(b));
  }
  Matrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* bk = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimError("matmul_nt: " + shape(a) + " times transpose of " + shape(b));
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(ai, b.row(j));
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimError("subtract: " + shape(a) + " minus " + shape(b));
  }
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

double frobenius_sq(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

double offdiag_gram_mass(const Matrix& h) {
  // sum_{r != j} h_r^T h_j = sum_i [(sum_r h_ir)^2 - sum_r h_ir^2]
  double s = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double row_sum = 0.0;
    double row_sq = 0.0;
    for (double v : h.row(i)) {
      row_sum += v;
      row_sq += v * v;
    }
    s += row_sum * row_sum - row_sq;
  }
  return s;
}

std::vector<double> column(const Matrix& m, std::size_t r) {
  check_column_index(m, r, m.cols());
  std::vector<double> v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, r);
  return v;
}

void set_column(Matrix& m, std::size_t r, std::span<const double> v) {
  check_column_index(m, r, m.cols());
  if (v.size() != m.rows()) {
    throw DimError("set_column: vector of length " + std::to_string(v.size()) + " for " +
                   shape(m) + " matrix");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, r) = v[i];
}

Matrix drop_column(const Matrix& m, std::size_t r) {
  check_column_index(m, r, m.cols());
  Matrix out(m.rows(), m.cols() - 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(r), dst.begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(r) + 1, src.end(),
              dst.begin() + static_cast<std::ptrdiff_t>(r));
  }
  return out;
}

Matrix insert_column(const Matrix& m, std::size_t r, std::span<const double> v) {
  check_column_index(m, r, m.cols() + 1);
  if (v.size() != m.rows()) throw DimError("insert_column: length mismatch");
  Matrix out(m.rows(), m.cols() + 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) out(i, j) = m(i, j);
    out(i, r) = v[i];
    for (std::size_t j = r; j < m.cols(); ++j) out(i, j + 1) = m(i, j);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> normalize_columns(Matrix& m) {
  std::vector<double> norms(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) norms[j] += m(i, j) * m(i, j);
  for (double& n : norms) n = std::sqrt(n);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (norms[j] > 0.0) m(i, j) /= norms[j];
  return norms;
}

}  // namespace daonmf
