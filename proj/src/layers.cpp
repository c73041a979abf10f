#include "stagecast/layers.hpp"

#include <cmath>

namespace stagecast {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t j = 0; j < t.size(); ++j)
    t[j] = rng.next_uniform(-limit, limit);
}

// Extract row t of a (T x m) sequence as a rank-1 var.
VarPtr sequence_row(Tape* tape, const VarPtr& seq, std::size_t t) {
  return flatten(tape, take_rows(tape, seq, t, 1));
}

}  // namespace

VarPtr stack_rows(Tape* tape, const std::vector<VarPtr>& rows) {
  if (rows.empty()) throw ArgumentError("stack_rows: no rows");
  const std::size_t len = rows[0]->value.size();
  Tensor out_t({rows.size(), len});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r]->value.size() != len)
      throw DimensionError("stack_rows: row lengths differ");
    out_t.as_matrix().row(idx(r)) = rows[r]->value.raw().transpose();
  }
  VarPtr out = std::make_shared<Var>(std::move(out_t));
  if (tape) {
    tape->record([rows, out, len]() {
      for (std::size_t r = 0; r < rows.size(); ++r)
        rows[r]->grad.raw() += out->grad.as_matrix().row(idx(r)).transpose();
    });
  }
  return out;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act,
                       const std::string& name)
    : in_(in),
      out_(out),
      act_(act),
      weight_(name + ".W", Tensor::zeros({out, in})),
      bias_(name + ".b", Tensor::zeros({out})) {}

VarPtr DenseLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  return dense_forward(ctx.tape, in, weight_, bias_, act_);
}

void DenseLayer::init(Rng& rng) { glorot_fill(weight_.value(), in_, out_, rng); }

VarPtr DropoutLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  if (!ctx.training || rate_ == 0.0) return in;
  if (!ctx.dropout_rng)
    throw InternalError("dropout in training mode requires a seeded rng");
  return dropout(ctx.tape, in, rate_, *ctx.dropout_rng);
}

RnnLayer::RnnLayer(std::size_t in, std::size_t hidden, const std::string& name)
    : in_(in),
      hidden_(hidden),
      weight_(name + ".W_xs", Tensor::zeros({hidden, in + hidden})),
      bias_(name + ".b_s", Tensor::zeros({hidden})) {}

VarPtr RnnLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  if (in->value.rank() != 2)
    throw DimensionError("rnn layer input must be rank 2, got " + in->value.shape_str());
  const std::size_t steps = in->value.extent(0);
  VarPtr state = std::make_shared<Var>(Tensor::zeros({hidden_}));
  std::vector<VarPtr> states;
  states.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    state = rnn_step(ctx.tape, sequence_row(ctx.tape, in, t), state, weight_, bias_);
    states.push_back(state);
  }
  return stack_rows(ctx.tape, states);
}

void RnnLayer::init(Rng& rng) {
  glorot_fill(weight_.value(), in_ + hidden_, hidden_, rng);
}

LstmLayer::LstmLayer(std::size_t in, std::size_t hidden, const std::string& name)
    : in_(in), hidden_(hidden) {
  auto make_w = [&](const char* gate) {
    return Parameter(name + ".W_" + gate, Tensor::zeros({hidden, in + hidden}));
  };
  auto make_b = [&](const char* gate) {
    return Parameter(name + ".b_" + gate, Tensor::zeros({hidden}));
  };
  params_.w_forget = make_w("f");
  params_.w_input = make_w("i");
  params_.w_cell = make_w("C");
  params_.w_output = make_w("O");
  params_.b_forget = make_b("f");
  params_.b_input = make_b("i");
  params_.b_cell = make_b("C");
  params_.b_output = make_b("O");
}

VarPtr LstmLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  if (in->value.rank() != 2)
    throw DimensionError("lstm layer input must be rank 2, got " + in->value.shape_str());
  const std::size_t steps = in->value.extent(0);
  VarPtr state = std::make_shared<Var>(Tensor::zeros({hidden_}));
  VarPtr cell = std::make_shared<Var>(Tensor::zeros({hidden_}));
  std::vector<VarPtr> states;
  states.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    auto [s, c] = lstm_step(ctx.tape, sequence_row(ctx.tape, in, t), state, cell, params_);
    state = s;
    cell = c;
    states.push_back(state);
  }
  return stack_rows(ctx.tape, states);
}

void LstmLayer::init(Rng& rng) {
  for (Parameter* w : {&params_.w_forget, &params_.w_input, &params_.w_cell,
                       &params_.w_output})
    glorot_fill(w->value(), in_ + hidden_, hidden_, rng);
}

Conv1dLayer::Conv1dLayer(std::size_t in_features, std::size_t filters,
                         std::size_t width, std::size_t stride, Activation act,
                         const std::string& name)
    : in_features_(in_features),
      filters_(filters),
      width_(width),
      stride_(stride),
      act_(act),
      kernels_(name + ".K", Tensor::zeros({filters, width, in_features})),
      bias_(name + ".b", Tensor::zeros({filters})) {}

VarPtr Conv1dLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  return conv1d_forward(ctx.tape, in, kernels_, bias_, stride_, act_);
}

void Conv1dLayer::init(Rng& rng) {
  glorot_fill(kernels_.value(), width_ * in_features_, filters_, rng);
}

VarPtr MaxPool1dLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  return maxpool1d(ctx.tape, in, window_, stride_);
}

VarPtr FlattenLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  return flatten(ctx.tape, in);
}

VarPtr TakeLastRowLayer::forward(ForwardContext& ctx, const VarPtr& in) {
  if (in->value.rank() != 2)
    throw DimensionError("take-last input must be rank 2, got " + in->value.shape_str());
  return flatten(ctx.tape, take_rows(ctx.tape, in, in->value.extent(0) - 1, 1));
}

}  // namespace stagecast
