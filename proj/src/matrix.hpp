#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace tsxai {

// Dense row-major matrix of doubles.  Deliberately minimal: the heavy algebra
// goes through Eigen maps over data(), this type is just the owning container
// that moves between modules and files.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double& at(int r, int c) {
    check_index(r, c);
    return (*this)(r, c);
  }
  double at(int r, int c) const {
    check_index(r, c);
    return (*this)(r, c);
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double min() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_)
      if (v < m) m = v;
    return m;
  }
  double max() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_)
      if (v > m) m = v;
    return m;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  static size_t checked_size(int rows, int cols) {
    if (rows < 0 || cols < 0)
      throw ShapeMismatch("matrix dimensions must be non-negative, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    return static_cast<size_t>(rows) * static_cast<size_t>(cols);
  }
  void check_index(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw ShapeMismatch("matrix index (" + std::to_string(r) + "," + std::to_string(c) +
                          ") out of range " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace tsxai
