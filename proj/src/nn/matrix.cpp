#include "jdrec/nn/matrix.hpp"

#include <cmath>
#include <string>

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ConfigError("matrix value count " + std::to_string(values_.size()) +
                      " does not match shape " + std::to_string(rows_) + "x" +
                      std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ConfigError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(values));
}

void Matrix::fill(double v) {
  for (double& x : values_) x = v;
}

void Matrix::resize(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  values_.assign(rows * cols, 0.0);
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  for (double x : values_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) {
    throw ConfigError("matmul: inner dimensions " + std::to_string(a.cols()) +
                      " and " + std::to_string(b.rows()) + " differ");
  }
  if (out.rows() != a.rows() || out.cols() != b.cols()) out.resize(a.rows(), b.cols());
  kernels::active().gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), out.data(),
                         false);
}

}  // namespace jdrec::nn
