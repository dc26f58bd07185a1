#include "fvtl/sparse_rows.hpp"

#include <algorithm>

#include "fvtl/error.hpp"

namespace fvtl {

SparseRows::SparseRows(const DenseMatrix& dense)
    : rows_(static_cast<std::size_t>(dense.rows())),
      cols_(static_cast<std::size_t>(dense.cols())) {
  offsets_.reserve(rows_ + 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const double v = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) {
        columns_.push_back(j);
        values_.push_back(v);
      }
    }
    offsets_.push_back(values_.size());
  }
}

void SparseRows::left_multiply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != rows_ || out.size() != cols_) {
    throw ShapeError("left_multiply: vector length does not match kernel");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double a = v[i];
    if (a == 0.0) continue;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      out[columns_[k]] += a * values_[k];
    }
  }
}

void SparseRows::right_multiply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != cols_ || out.size() != rows_) {
    throw ShapeError("right_multiply: vector length does not match kernel");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      acc += values_[k] * v[columns_[k]];
    }
    out[i] = acc;
  }
}

}  // namespace fvtl
