#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fvtl {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Compressed-row copy of a nonnegative kernel, used for every vector-kernel
/// product. Exact zeros are dropped; stored entries are bit-identical to the
/// dense source.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(const DenseMatrix& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_columns(std::size_t row) const {
    return {columns_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const double> row_values(std::size_t row) const {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  /// out = v M (row vector times kernel).
  void left_multiply(std::span<const double> v, std::span<double> out) const;
  /// out = M v (kernel times column vector).
  void right_multiply(std::span<const double> v, std::span<double> out) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

}  // namespace fvtl
