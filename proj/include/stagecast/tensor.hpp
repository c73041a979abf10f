#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "stagecast/errors.hpp"

namespace stagecast {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

/// Dense n-dimensional array of doubles, row-major. The single numeric
/// carrier in the engine; 1-D and 2-D views map onto Eigen types.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, Eigen::VectorXd data);

  static Tensor zeros(std::vector<std::size_t> shape);
  /// 1-D tensor from literal values.
  static Tensor values(std::initializer_list<double> v);
  static Tensor from_matrix(const RowMatrix& m);
  static Tensor from_vector(const Eigen::VectorXd& v);
  static Tensor scalar(double v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  Eigen::VectorXd& raw() { return data_; }
  const Eigen::VectorXd& raw() const { return data_; }

  double& operator[](std::size_t i) { return data_[static_cast<Eigen::Index>(i)]; }
  double operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }

  /// 2-D element access; requires rank 2.
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  /// Map as a rows x cols matrix; the product must match size().
  MatMap as_matrix(std::size_t rows, std::size_t cols);
  ConstMatMap as_matrix(std::size_t rows, std::size_t cols) const;
  /// Map a rank-2 tensor with its own extents.
  MatMap as_matrix();
  ConstMatMap as_matrix() const;

  /// Same data, new shape (sizes must agree).
  Tensor reshaped(std::vector<std::size_t> shape) const;

  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.allFinite(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  Eigen::VectorXd data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

/// Throws DimensionError with both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace stagecast
