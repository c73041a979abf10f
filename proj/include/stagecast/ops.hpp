#pragma once

#include <utility>

#include "stagecast/rng.hpp"
#include "stagecast/tape.hpp"

namespace stagecast {

enum class Activation { Identity, Sigmoid, Tanh, Relu };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

double sigmoid(double z);

/// Elementwise activation; derivative is taken from pre-activation z and
/// output y (relu'(0) defined as 0).
Eigen::ArrayXd apply_activation(Activation act, const Eigen::ArrayXd& z);
Eigen::ArrayXd activation_derivative(Activation act, const Eigen::ArrayXd& z,
                                     const Eigen::ArrayXd& y);

/// Eight learnable tensors of one LSTM cell, each weight n x (m+n).
struct LstmParams {
  Parameter w_forget, w_input, w_cell, w_output;
  Parameter b_forget, b_input, b_cell, b_output;

  std::vector<Parameter*> all() {
    return {&w_forget, &w_input, &w_cell, &w_output,
            &b_forget, &b_input, &b_cell, &b_output};
  }
};

/// activation(W x + b) for a 1-D input. Recorded on the tape when non-null.
VarPtr dense_forward(Tape* tape, const VarPtr& x, Parameter& w, Parameter& b,
                     Activation act);

/// S_t = tanh(W_xs (x_t concat S_prev) + b_s).
VarPtr rnn_step(Tape* tape, const VarPtr& x_t, const VarPtr& s_prev,
                Parameter& w_xs, Parameter& b_s);

/// One LSTM cell step; returns (S_t, C_t).
std::pair<VarPtr, VarPtr> lstm_step(Tape* tape, const VarPtr& x_t,
                                    const VarPtr& s_prev, const VarPtr& c_prev,
                                    LstmParams& params);

/// Valid (unpadded) 1-D convolution over a T x F input. Kernels are shaped
/// (K, width, F); output is T' x K with T' = floor((T - width)/stride) + 1.
VarPtr conv1d_forward(Tape* tape, const VarPtr& x, Parameter& kernels,
                      Parameter& bias, std::size_t stride, Activation act);

/// Per-channel windowed maximum over a T x K input; backward routes each
/// window's gradient to the first argmax position.
VarPtr maxpool1d(Tape* tape, const VarPtr& x, std::size_t window,
                 std::size_t stride);

/// Reshape to rank 1.
VarPtr flatten(Tape* tape, const VarPtr& x);

/// Row slice [start, start+count) of a rank-2 input.
VarPtr take_rows(Tape* tape, const VarPtr& x, std::size_t start, std::size_t count);

/// Inverted dropout with a seeded mask; identity when rate is 0.
VarPtr dropout(Tape* tape, const VarPtr& x, double rate, Rng& rng);

/// Scalar mean squared error between two same-shape tensors.
VarPtr mse_loss(Tape* tape, const VarPtr& pred, const Tensor& target);

}  // namespace stagecast
