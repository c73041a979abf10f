#include "stagecast/tensor.hpp"

#include <sstream>

namespace stagecast {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      data_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_product(shape_)))) {}

Tensor::Tensor(std::vector<std::size_t> shape, Eigen::VectorXd data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::size_t>(data_.size()) != shape_product(shape_))
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::values(std::initializer_list<double> v) {
  Tensor t({v.size()});
  Eigen::Index i = 0;
  for (double x : v) t.data_[i++] = x;
  return t;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::from_matrix(const RowMatrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  t.as_matrix() = m;
  return t;
}

Tensor Tensor::from_vector(const Eigen::VectorXd& v) {
  return Tensor({static_cast<std::size_t>(v.size())}, v);
}

Tensor Tensor::scalar(double v) {
  Tensor t({1});
  t[0] = v;
  return t;
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return data_[static_cast<Eigen::Index>(r * shape_.at(1) + c)];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data_[static_cast<Eigen::Index>(r * shape_.at(1) + c)];
}

MatMap Tensor::as_matrix(std::size_t rows, std::size_t cols) {
  if (rows * cols != size())
    throw DimensionError("cannot view tensor " + shape_str() + " as " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  return MatMap(data_.data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

ConstMatMap Tensor::as_matrix(std::size_t rows, std::size_t cols) const {
  if (rows * cols != size())
    throw DimensionError("cannot view tensor " + shape_str() + " as " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  return ConstMatMap(data_.data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MatMap Tensor::as_matrix() {
  if (rank() != 2) throw DimensionError("as_matrix on tensor of shape " + shape_str());
  return as_matrix(shape_[0], shape_[1]);
}

ConstMatMap Tensor::as_matrix() const {
  if (rank() != 2) throw DimensionError("as_matrix on tensor of shape " + shape_str());
  return as_matrix(shape_[0], shape_[1]);
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_product(shape) != size())
    throw DimensionError("reshape of " + shape_str() + " to incompatible extents");
  return Tensor(std::move(shape), data_);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ", ";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(where) + ": shape " + a.shape_str() +
                         " vs " + b.shape_str());
}

}  // namespace stagecast
