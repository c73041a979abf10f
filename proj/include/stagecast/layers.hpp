#pragma once

#include <memory>
#include <vector>

#include "stagecast/ops.hpp"

namespace stagecast {

/// Row-stack of equal-length rank-1 vars into a (rows x len) matrix.
VarPtr stack_rows(Tape* tape, const std::vector<VarPtr>& rows);

struct ForwardContext {
  Tape* tape = nullptr;        // null: inference fast path, nothing recorded
  bool training = false;       // enables dropout masks
  Rng* dropout_rng = nullptr;  // required when training with dropout layers
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual VarPtr forward(ForwardContext& ctx, const VarPtr& in) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  virtual void init(Rng&) {}
};

class DenseLayer : public Layer {
 public:
  DenseLayer(std::size_t in, std::size_t out, Activation act, const std::string& name);
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  void init(Rng& rng) override;

 private:
  std::size_t in_, out_;
  Activation act_;
  Parameter weight_, bias_;
};

class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {}
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;

 private:
  double rate_;
};

/// Simple recurrent layer; consumes a (T x m) sequence and returns the full
/// (T x n) hidden-state sequence in increasing-time order.
class RnnLayer : public Layer {
 public:
  RnnLayer(std::size_t in, std::size_t hidden, const std::string& name);
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  void init(Rng& rng) override;

 private:
  std::size_t in_, hidden_;
  Parameter weight_, bias_;
};

/// LSTM layer; same sequence-in, full-hidden-sequence-out contract as RnnLayer.
class LstmLayer : public Layer {
 public:
  LstmLayer(std::size_t in, std::size_t hidden, const std::string& name);
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
  std::vector<Parameter*> parameters() override { return params_.all(); }
  void init(Rng& rng) override;

 private:
  std::size_t in_, hidden_;
  LstmParams params_;
};

class Conv1dLayer : public Layer {
 public:
  Conv1dLayer(std::size_t in_features, std::size_t filters, std::size_t width,
              std::size_t stride, Activation act, const std::string& name);
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
  std::vector<Parameter*> parameters() override { return {&kernels_, &bias_}; }
  void init(Rng& rng) override;

 private:
  std::size_t in_features_, filters_, width_, stride_;
  Activation act_;
  Parameter kernels_, bias_;
};

class MaxPool1dLayer : public Layer {
 public:
  MaxPool1dLayer(std::size_t window, std::size_t stride)
      : window_(window), stride_(stride) {}
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;

 private:
  std::size_t window_, stride_;
};

class FlattenLayer : public Layer {
 public:
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
};

/// Keeps only the final timestep's hidden state of a (T x n) sequence.
class TakeLastRowLayer : public Layer {
 public:
  VarPtr forward(ForwardContext& ctx, const VarPtr& in) override;
};

}  // namespace stagecast
