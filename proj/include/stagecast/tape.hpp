#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stagecast/tensor.hpp"

namespace stagecast {

/// One value node in a recorded forward pass; grad matches value's shape.
struct Var {
  Tensor value;
  Tensor grad;

  explicit Var(Tensor v) : value(std::move(v)), grad(Tensor::zeros(value.shape())) {}
};

using VarPtr = std::shared_ptr<Var>;

/// A learnable tensor. The gradient accumulates additively across a backward
/// pass and is zero right after reset_grad().
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value)
      : name_(std::move(name)),
        value_(std::move(value)),
        grad_(Tensor::zeros(value_.shape())) {}

  const std::string& name() const { return name_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }

  void reset_grad() { grad_.set_zero(); }

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
};

/// Ordered record of executed primitives. Each forward primitive pushes one
/// backward closure; backward() replays them exactly once, in reverse.
class Tape {
 public:
  VarPtr track(Tensor value) { return std::make_shared<Var>(std::move(value)); }

  void record(std::function<void()> backprop) { ops_.push_back(std::move(backprop)); }

  bool empty() const { return ops_.empty(); }
  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

  /// Seeds the output gradient and propagates through every recorded op.
  void backward(const VarPtr& output, const Tensor& seed) {
    if (ops_.empty()) throw ArgumentError("backward on an empty tape");
    require_same_shape(output->value, seed, "backward seed");
    output->grad.raw() += seed.raw();
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> ops_;
};

}  // namespace stagecast
