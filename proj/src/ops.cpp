#include "stagecast/ops.hpp"

#include <cmath>
#include <utility>

namespace stagecast {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ArgumentError("unknown activation: " + name);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::ArrayXd apply_activation(Activation act, const Eigen::ArrayXd& z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Sigmoid: return 1.0 / (1.0 + (-z).exp());
    case Activation::Tanh: return z.tanh();
    case Activation::Relu: return z.max(0.0);
  }
  return z;
}

Eigen::ArrayXd activation_derivative(Activation act, const Eigen::ArrayXd& z,
                                     const Eigen::ArrayXd& y) {
  switch (act) {
    case Activation::Identity: return Eigen::ArrayXd::Ones(z.size());
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Tanh: return 1.0 - y.square();
    case Activation::Relu: return (z > 0.0).cast<double>();
  }
  return Eigen::ArrayXd::Ones(z.size());
}

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void check_vector(const Tensor& t, const char* what) {
  if (t.rank() != 1)
    throw DimensionError(std::string(what) + " must be rank 1, got " + t.shape_str());
}

// activation(W u + b) on a plain vector u; shared by dense and the gate math.
struct AffineResult {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

AffineResult affine_activate(const Tensor& w, const Tensor& b,
                             const Eigen::VectorXd& u, Activation act,
                             const char* where) {
  if (w.rank() != 2)
    throw DimensionError(std::string(where) + ": weight must be rank 2, got " +
                         w.shape_str());
  const std::size_t rows = w.extent(0), cols = w.extent(1);
  if (cols != static_cast<std::size_t>(u.size()))
    throw DimensionError(std::string(where) + ": weight " + w.shape_str() +
                         " vs input length " + std::to_string(u.size()));
  if (b.size() != rows)
    throw DimensionError(std::string(where) + ": bias " + b.shape_str() +
                         " vs weight rows " + std::to_string(rows));
  AffineResult r;
  r.z = w.as_matrix(rows, cols) * u + b.raw();
  r.y = apply_activation(act, r.z.array());
  return r;
}

}  // namespace

VarPtr dense_forward(Tape* tape, const VarPtr& x, Parameter& w, Parameter& b,
                     Activation act) {
  check_vector(x->value, "dense input");
  AffineResult r = affine_activate(w.value(), b.value(), x->value.raw(), act, "dense");
  const std::size_t rows = w.value().extent(0), cols = w.value().extent(1);
  VarPtr out = std::make_shared<Var>(Tensor::from_vector(r.y));
  if (tape) {
    tape->record([x, out, &w, &b, act, rows, cols, z = std::move(r.z)]() {
      Eigen::ArrayXd gz = out->grad.raw().array() *
                          activation_derivative(act, z.array(), out->value.raw().array());
      w.grad().as_matrix(rows, cols).noalias() +=
          gz.matrix() * x->value.raw().transpose();
      b.grad().raw() += gz.matrix();
      x->grad.raw().noalias() +=
          w.value().as_matrix(rows, cols).transpose() * gz.matrix();
    });
  }
  return out;
}

VarPtr rnn_step(Tape* tape, const VarPtr& x_t, const VarPtr& s_prev,
                Parameter& w_xs, Parameter& b_s) {
  check_vector(x_t->value, "rnn input");
  check_vector(s_prev->value, "rnn state");
  const std::size_t m = x_t->value.size(), n = s_prev->value.size();
  Eigen::VectorXd u(idx(m + n));
  u << x_t->value.raw(), s_prev->value.raw();
  AffineResult r =
      affine_activate(w_xs.value(), b_s.value(), u, Activation::Tanh, "rnn_step");
  VarPtr out = std::make_shared<Var>(Tensor::from_vector(r.y));
  if (tape) {
    tape->record([x_t, s_prev, out, &w_xs, &b_s, m, n, u = std::move(u)]() {
      Eigen::ArrayXd gz = out->grad.raw().array() *
                          (1.0 - out->value.raw().array().square());
      w_xs.grad().as_matrix(n, m + n).noalias() += gz.matrix() * u.transpose();
      b_s.grad().raw() += gz.matrix();
      Eigen::VectorXd gu =
          w_xs.value().as_matrix(n, m + n).transpose() * gz.matrix();
      x_t->grad.raw() += gu.head(idx(m));
      s_prev->grad.raw() += gu.tail(idx(n));
    });
  }
  return out;
}

std::pair<VarPtr, VarPtr> lstm_step(Tape* tape, const VarPtr& x_t,
                                    const VarPtr& s_prev, const VarPtr& c_prev,
                                    LstmParams& p) {
  check_vector(x_t->value, "lstm input");
  check_vector(s_prev->value, "lstm hidden state");
  check_vector(c_prev->value, "lstm cell state");
  const std::size_t m = x_t->value.size(), n = s_prev->value.size();
  if (c_prev->value.size() != n)
    throw DimensionError("lstm cell state " + c_prev->value.shape_str() +
                         " vs hidden state " + s_prev->value.shape_str());
  Eigen::VectorXd u(idx(m + n));
  u << x_t->value.raw(), s_prev->value.raw();

  Eigen::ArrayXd f = affine_activate(p.w_forget.value(), p.b_forget.value(), u,
                                     Activation::Sigmoid, "lstm forget gate").y;
  Eigen::ArrayXd i = affine_activate(p.w_input.value(), p.b_input.value(), u,
                                     Activation::Sigmoid, "lstm input gate").y;
  Eigen::ArrayXd c_hat = affine_activate(p.w_cell.value(), p.b_cell.value(), u,
                                         Activation::Tanh, "lstm addition gate").y;
  Eigen::ArrayXd o = affine_activate(p.w_output.value(), p.b_output.value(), u,
                                     Activation::Sigmoid, "lstm output gate").y;
  Eigen::ArrayXd c = f * c_prev->value.raw().array() + i * c_hat;
  Eigen::ArrayXd tc = c.tanh();
  Eigen::ArrayXd s = tc * o;

  VarPtr s_t = std::make_shared<Var>(Tensor::from_vector(s.matrix()));
  VarPtr c_t = std::make_shared<Var>(Tensor::from_vector(c.matrix()));
  if (tape) {
    tape->record([x_t, s_prev, c_prev, s_t, c_t, &p, m, n, u = std::move(u),
                  f = std::move(f), i = std::move(i), c_hat = std::move(c_hat),
                  o = std::move(o), tc = std::move(tc)]() {
      const Eigen::ArrayXd gs = s_t->grad.raw().array();
      // Cell-state gradient: direct uses of C_t plus the tanh path through S_t.
      Eigen::ArrayXd gc = c_t->grad.raw().array() + gs * o * (1.0 - tc.square());
      Eigen::ArrayXd go = gs * tc;
      Eigen::ArrayXd gf = gc * c_prev->value.raw().array();
      Eigen::ArrayXd gi = gc * c_hat;
      Eigen::ArrayXd gc_hat = gc * i;
      c_prev->grad.raw().array() += gc * f;

      Eigen::VectorXd gu = Eigen::VectorXd::Zero(idx(m + n));
      auto gate = [&](Parameter& w, Parameter& b, const Eigen::ArrayXd& gy,
                      const Eigen::ArrayXd& dy) {
        Eigen::VectorXd gz = (gy * dy).matrix();
        w.grad().as_matrix(n, m + n).noalias() += gz * u.transpose();
        b.grad().raw() += gz;
        gu.noalias() += w.value().as_matrix(n, m + n).transpose() * gz;
      };
      gate(p.w_forget, p.b_forget, gf, f * (1.0 - f));
      gate(p.w_input, p.b_input, gi, i * (1.0 - i));
      gate(p.w_cell, p.b_cell, gc_hat, 1.0 - c_hat.square());
      gate(p.w_output, p.b_output, go, o * (1.0 - o));
      x_t->grad.raw() += gu.head(idx(m));
      s_prev->grad.raw() += gu.tail(idx(n));
    });
  }
  return {s_t, c_t};
}

VarPtr conv1d_forward(Tape* tape, const VarPtr& x, Parameter& kernels,
                      Parameter& bias, std::size_t stride, Activation act) {
  if (x->value.rank() != 2)
    throw DimensionError("conv1d input must be rank 2, got " + x->value.shape_str());
  if (kernels.value().rank() != 3)
    throw DimensionError("conv1d kernels must be rank 3, got " +
                         kernels.value().shape_str());
  const std::size_t t_in = x->value.extent(0), f = x->value.extent(1);
  const std::size_t k = kernels.value().extent(0);
  const std::size_t width = kernels.value().extent(1);
  if (kernels.value().extent(2) != f)
    throw DimensionError("conv1d kernels " + kernels.value().shape_str() +
                         " vs input " + x->value.shape_str());
  if (bias.value().size() != k)
    throw DimensionError("conv1d bias " + bias.value().shape_str() + " vs " +
                         std::to_string(k) + " kernels");
  if (stride == 0) throw ArgumentError("conv1d stride must be positive");
  if (width > t_in)
    throw DimensionError("conv1d kernel width " + std::to_string(width) +
                         " exceeds input length " + std::to_string(t_in) +
                         " (empty output)");
  const std::size_t t_out = (t_in - width) / stride + 1;

  // im2col: one row per output position, one column per (offset, feature).
  RowMatrix patches(idx(t_out), idx(width * f));
  ConstMatMap xin = std::as_const(x->value).as_matrix();
  for (std::size_t pos = 0; pos < t_out; ++pos)
    for (std::size_t j = 0; j < width; ++j)
      patches.block(idx(pos), idx(j * f), 1, idx(f)) =
          xin.row(idx(pos * stride + j));

  ConstMatMap kmat = std::as_const(kernels.value()).as_matrix(k, width * f);
  RowMatrix z = patches * kmat.transpose();
  z.rowwise() += bias.value().raw().transpose();
  Tensor out_t({t_out, k});
  // z is row-major, so its flat storage already matches the tensor layout.
  out_t.raw() =
      apply_activation(act, Eigen::Map<const Eigen::ArrayXd>(z.data(), z.size()))
          .matrix();
  VarPtr out = std::make_shared<Var>(std::move(out_t));
  if (tape) {
    tape->record([x, out, &kernels, &bias, act, stride, t_out, width, f, k,
                  patches = std::move(patches), z = std::move(z)]() {
      Eigen::ArrayXd gz_flat =
          out->grad.raw().array() *
          activation_derivative(act,
                                Eigen::Map<const Eigen::ArrayXd>(z.data(), z.size()),
                                out->value.raw().array());
      ConstMatMap gz(gz_flat.data(), idx(t_out), idx(k));
      kernels.grad().as_matrix(k, width * f).noalias() += gz.transpose() * patches;
      bias.grad().raw() += gz.colwise().sum().transpose();
      RowMatrix gpatches = gz * kernels.value().as_matrix(k, width * f);
      MatMap gx = x->grad.as_matrix();
      for (std::size_t pos = 0; pos < t_out; ++pos)
        for (std::size_t j = 0; j < width; ++j)
          gx.row(idx(pos * stride + j)) +=
              gpatches.block(idx(pos), idx(j * f), 1, idx(f));
    });
  }
  return out;
}

VarPtr maxpool1d(Tape* tape, const VarPtr& x, std::size_t window,
                 std::size_t stride) {
  if (x->value.rank() != 2)
    throw DimensionError("maxpool1d input must be rank 2, got " + x->value.shape_str());
  if (window == 0 || stride == 0)
    throw ArgumentError("maxpool1d window and stride must be positive");
  const std::size_t t_in = x->value.extent(0), k = x->value.extent(1);
  if (window > t_in)
    throw DimensionError("maxpool1d window " + std::to_string(window) +
                         " exceeds input length " + std::to_string(t_in) +
                         " (empty output)");
  const std::size_t t_out = (t_in - window) / stride + 1;
  Tensor out_t({t_out, k});
  std::vector<std::size_t> argmax(t_out * k);
  for (std::size_t pos = 0; pos < t_out; ++pos) {
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t best = pos * stride;
      double best_v = x->value.at(best, c);
      for (std::size_t j = 1; j < window; ++j) {
        const std::size_t row = pos * stride + j;
        if (x->value.at(row, c) > best_v) {  // first occurrence wins ties
          best_v = x->value.at(row, c);
          best = row;
        }
      }
      out_t.at(pos, c) = best_v;
      argmax[pos * k + c] = best;
    }
  }
  VarPtr out = std::make_shared<Var>(std::move(out_t));
  if (tape) {
    tape->record([x, out, k, t_out, argmax = std::move(argmax)]() {
      for (std::size_t pos = 0; pos < t_out; ++pos)
        for (std::size_t c = 0; c < k; ++c)
          x->grad.at(argmax[pos * k + c], c) += out->grad.at(pos, c);
    });
  }
  return out;
}

VarPtr flatten(Tape* tape, const VarPtr& x) {
  VarPtr out = std::make_shared<Var>(x->value.reshaped({x->value.size()}));
  if (tape) {
    tape->record([x, out]() { x->grad.raw() += out->grad.raw(); });
  }
  return out;
}

VarPtr take_rows(Tape* tape, const VarPtr& x, std::size_t start, std::size_t count) {
  if (x->value.rank() != 2)
    throw DimensionError("take_rows input must be rank 2, got " + x->value.shape_str());
  const std::size_t rows = x->value.extent(0), cols = x->value.extent(1);
  if (start + count > rows)
    throw DimensionError("take_rows [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of " +
                         std::to_string(rows) + " rows");
  Tensor out_t({count, cols});
  out_t.as_matrix() = x->value.as_matrix().middleRows(idx(start), idx(count));
  VarPtr out = std::make_shared<Var>(std::move(out_t));
  if (tape) {
    tape->record([x, out, start, count, cols]() {
      x->grad.as_matrix().middleRows(idx(start), idx(count)) +=
          out->grad.as_matrix(count, cols);
    });
  }
  return out;
}

VarPtr dropout(Tape* tape, const VarPtr& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ArgumentError("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const double keep = 1.0 - rate;
  Eigen::ArrayXd mask(x->value.raw().size());
  for (Eigen::Index j = 0; j < mask.size(); ++j)
    mask[j] = rng.next_uniform() < keep ? 1.0 / keep : 0.0;
  Tensor out_t(x->value.shape());
  out_t.raw() = (x->value.raw().array() * mask).matrix();
  VarPtr out = std::make_shared<Var>(std::move(out_t));
  if (tape) {
    tape->record([x, out, mask = std::move(mask)]() {
      x->grad.raw().array() += out->grad.raw().array() * mask;
    });
  }
  return out;
}

VarPtr mse_loss(Tape* tape, const VarPtr& pred, const Tensor& target) {
  require_same_shape(pred->value, target, "mse_loss");
  const double n = static_cast<double>(pred->value.size());
  Eigen::VectorXd diff = pred->value.raw() - target.raw();
  VarPtr out = std::make_shared<Var>(Tensor::scalar(diff.squaredNorm() / n));
  if (tape) {
    tape->record([pred, out, n, diff = std::move(diff)]() {
      pred->grad.raw() += (2.0 / n) * out->grad[0] * diff;
    });
  }
  return out;
}

}  // namespace stagecast
