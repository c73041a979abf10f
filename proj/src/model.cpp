#include "stagecast/model.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "stagecast/gradcheck.hpp"

namespace stagecast {

namespace {
Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Rnn: return "rnn";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Cnn: return "cnn";
    case ModelKind::Rcnn: return "rcnn";
    case ModelKind::LinearRegression: return "linear";
    case ModelKind::Persistence: return "persistence";
  }
  return "rcnn";
}

ModelKind model_kind_from_name(const std::string& name) {
  for (ModelKind k : {ModelKind::Mlp, ModelKind::Rnn, ModelKind::Lstm,
                      ModelKind::Cnn, ModelKind::Rcnn,
                      ModelKind::LinearRegression, ModelKind::Persistence})
    if (name == model_kind_name(k)) return k;
  throw ArgumentError("unknown model kind: '" + name + "'");
}

ArchitectureSpec ArchitectureSpec::defaults(ModelKind kind, std::size_t w,
                                            std::size_t k,
                                            const FeatureSchema& schema) {
  ArchitectureSpec s;
  s.kind = kind;
  s.w = w;
  s.k = k;
  s.n_features = schema.size();
  s.n_future = schema.future_columns().size();
  s.target_columns = schema.target_columns();
  s.future_columns = schema.future_columns();
  switch (kind) {
    case ModelKind::Mlp:
      s.hidden_sizes = {128, 128};
      s.dropout = 0.2;
      break;
    case ModelKind::Rnn:
    case ModelKind::Lstm:
      s.recurrent_hidden = 64;
      break;
    case ModelKind::Cnn:
      s.conv_blocks = {{64, 3, 2}, {64, 3, 2}};
      break;
    case ModelKind::Rcnn:
      s.recurrent_hidden = 64;
      s.conv_blocks = {{64, 3, 2}};
      break;
    case ModelKind::LinearRegression:
      s.ridge_lambda = 1e-6;
      break;
    case ModelKind::Persistence:
      break;
  }
  return s;
}

namespace {

void validate_spec(const ArchitectureSpec& spec) {
  if (spec.w == 0 || spec.k == 0)
    throw ArgumentError("architecture spec needs positive w and k");
  if (spec.n_features == 0 || spec.target_columns.empty())
    throw ArgumentError("architecture spec needs feature geometry");
  for (std::size_t c : spec.target_columns)
    if (c >= spec.n_features)
      throw ArgumentError("target column index out of range");
  if (spec.kind == ModelKind::Rcnn) {
    const auto& st = spec.rcnn_stages;
    const auto rec = std::find(st.begin(), st.end(), "recurrent");
    const auto conv = std::find(st.begin(), st.end(), "conv");
    if (rec == st.end() || conv == st.end() || conv < rec)
      throw ArgumentError("rcnn stages must list the recurrent stage before conv");
  }
}

// Appends conv+pool blocks for a T x C sequence; returns the final T x C.
std::pair<std::size_t, std::size_t> append_conv_stage(
    std::vector<std::unique_ptr<Layer>>& layers, std::size_t t, std::size_t c,
    const std::vector<ConvBlockSpec>& blocks, const std::string& prefix) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const ConvBlockSpec& blk = blocks[b];
    if (blk.width > t)
      throw ArgumentError(prefix + " conv block " + std::to_string(b) +
                          ": kernel width " + std::to_string(blk.width) +
                          " exceeds sequence length " + std::to_string(t));
    layers.push_back(std::make_unique<Conv1dLayer>(
        c, blk.filters, blk.width, 1, Activation::Relu,
        prefix + ".conv" + std::to_string(b)));
    t = t - blk.width + 1;
    c = blk.filters;
    if (blk.pool_width > 1) {
      if (blk.pool_width > t)
        throw ArgumentError(prefix + " conv block " + std::to_string(b) +
                            ": pool width exceeds sequence length");
      layers.push_back(std::make_unique<MaxPool1dLayer>(blk.pool_width, blk.pool_width));
      t = (t - blk.pool_width) / blk.pool_width + 1;
    }
  }
  return {t, c};
}

}  // namespace

SurrogateModel::SurrogateModel(ArchitectureSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  validate_spec(spec_);
  const std::size_t out = spec_.output_dim();
  switch (spec_.kind) {
    case ModelKind::Mlp: {
      std::size_t in = spec_.flat_input_dim();
      for (std::size_t i = 0; i < spec_.hidden_sizes.size(); ++i) {
        layers_.push_back(std::make_unique<DenseLayer>(
            in, spec_.hidden_sizes[i], Activation::Relu,
            "mlp.h" + std::to_string(i + 1)));
        if (spec_.dropout > 0.0)
          layers_.push_back(std::make_unique<DropoutLayer>(spec_.dropout));
        in = spec_.hidden_sizes[i];
      }
      layers_.push_back(
          std::make_unique<DenseLayer>(in, out, Activation::Identity, "mlp.head"));
      break;
    }
    case ModelKind::Rnn:
    case ModelKind::Lstm: {
      const std::size_t c = spec_.sequence_channels();
      const std::size_t h = spec_.recurrent_hidden;
      if (spec_.kind == ModelKind::Rnn)
        layers_.push_back(std::make_unique<RnnLayer>(c, h, "rnn"));
      else
        layers_.push_back(std::make_unique<LstmLayer>(c, h, "lstm"));
      layers_.push_back(std::make_unique<TakeLastRowLayer>());
      layers_.push_back(
          std::make_unique<DenseLayer>(h, out, Activation::Identity, "head"));
      break;
    }
    case ModelKind::Cnn: {
      auto [t, c] = append_conv_stage(layers_, spec_.sequence_length(),
                                      spec_.sequence_channels(), spec_.conv_blocks,
                                      "cnn");
      layers_.push_back(std::make_unique<FlattenLayer>());
      layers_.push_back(
          std::make_unique<DenseLayer>(t * c, out, Activation::Identity, "head"));
      break;
    }
    case ModelKind::Rcnn: {
      const std::size_t h = spec_.recurrent_hidden;
      layers_.push_back(
          std::make_unique<RnnLayer>(spec_.sequence_channels(), h, "rcnn.rnn"));
      // The conv stage sees the full hidden-state sequence, (w+k) x hidden.
      auto [t, c] = append_conv_stage(layers_, spec_.sequence_length(), h,
                                      spec_.conv_blocks, "rcnn");
      layers_.push_back(std::make_unique<FlattenLayer>());
      layers_.push_back(
          std::make_unique<DenseLayer>(t * c, out, Activation::Identity, "head"));
      break;
    }
    case ModelKind::LinearRegression:
      layers_.push_back(std::make_unique<DenseLayer>(
          spec_.flat_input_dim(), out, Activation::Identity, "lr"));
      break;
    case ModelKind::Persistence:
      break;
  }
  Rng rng(seed_);
  for (auto& layer : layers_) layer->init(rng);
}

SurrogateModel build_model(const ArchitectureSpec& spec, std::uint64_t seed) {
  return SurrogateModel(spec, seed);
}

std::vector<Parameter*> SurrogateModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_)
    for (Parameter* p : layer->parameters()) out.push_back(p);
  return out;
}

Tensor SurrogateModel::encode_input(const WindowSample& sample) const {
  if (sample.past.rank() != 2 || sample.past.extent(0) != spec_.w ||
      sample.past.extent(1) != spec_.n_features || sample.future.extent(0) != spec_.k ||
      sample.future.extent(1) != spec_.n_future)
    throw DimensionError("sample geometry past " + sample.past.shape_str() +
                         ", future " + sample.future.shape_str() +
                         " does not match spec (w=" + std::to_string(spec_.w) +
                         ", k=" + std::to_string(spec_.k) + ")");

  if (spec_.kind == ModelKind::Mlp || spec_.kind == ModelKind::LinearRegression) {
    Tensor flat({spec_.flat_input_dim()});
    flat.raw() << sample.past.raw(), sample.future.raw();
    return flat;
  }

  // Sequence encoding: past rows carry all measurements, future rows carry the
  // known covariates with zeros elsewhere; the extra channel flags future rows.
  const std::size_t t_total = spec_.sequence_length();
  const std::size_t channels = spec_.sequence_channels();
  Tensor seq({t_total, channels});
  MatMap m = seq.as_matrix();
  m.setZero();
  m.block(0, 0, idx(spec_.w), idx(spec_.n_features)) = sample.past.as_matrix();
  for (std::size_t fcol = 0; fcol < spec_.future_columns.size(); ++fcol) {
    const std::size_t col = spec_.future_columns[fcol];
    for (std::size_t j = 0; j < spec_.k; ++j)
      m(idx(spec_.w + j), idx(col)) = sample.future.at(j, fcol);
  }
  for (std::size_t j = 0; j < spec_.k; ++j)
    m(idx(spec_.w + j), idx(spec_.n_features)) = 1.0;
  return seq;
}

VarPtr SurrogateModel::forward_sample(ForwardContext& ctx, const WindowSample& sample) {
  if (spec_.kind == ModelKind::Persistence)
    throw ArgumentError("persistence baseline has no layer forward pass");
  VarPtr v = std::make_shared<Var>(encode_input(sample));
  for (auto& layer : layers_) v = layer->forward(ctx, v);
  if (v->value.size() != spec_.output_dim())
    throw InternalError("model output length " + std::to_string(v->value.size()) +
                        " does not match k x targets = " +
                        std::to_string(spec_.output_dim()));
  return v;
}

Tensor SurrogateModel::predict(const std::vector<WindowSample>& batch) {
  if (spec_.kind == ModelKind::Persistence)
    return persistence_baseline(batch, spec_.target_columns);
  Tensor out({batch.size(), spec_.k, spec_.n_targets()});
  ForwardContext ctx;  // no tape, inference mode
  for (std::size_t b = 0; b < batch.size(); ++b) {
    VarPtr y = forward_sample(ctx, batch[b]);
    out.raw().segment(idx(b * spec_.output_dim()), idx(spec_.output_dim())) =
        y->value.raw();
  }
  return out;
}

Tensor persistence_baseline(const std::vector<WindowSample>& batch,
                            const std::vector<std::size_t>& target_columns) {
  if (batch.empty()) return Tensor({0, 0, target_columns.size()});
  const std::size_t k = batch[0].target.extent(0);
  const std::size_t n_t = target_columns.size();
  Tensor out({batch.size(), k, n_t});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const WindowSample& s = batch[b];
    const std::size_t last = s.past.extent(0) - 1;
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < n_t; ++c)
        out[(b * k + j) * n_t + c] = s.past.at(last, target_columns[c]);
  }
  return out;
}

SurrogateModel fit_linear_regression(const std::vector<WindowSample>& train,
                                     const ArchitectureSpec& spec,
                                     std::uint64_t seed) {
  if (spec.kind != ModelKind::LinearRegression)
    throw ArgumentError("fit_linear_regression requires a linear spec");
  if (train.empty()) throw ArgumentError("no training samples");
  SurrogateModel model(spec, seed);

  const std::size_t d = spec.flat_input_dim();
  const std::size_t out = spec.output_dim();
  const std::size_t n = train.size();
  if (spec.ridge_lambda == 0.0 && n < d + 1)
    throw NumericError("normal equations are singular with " + std::to_string(n) +
                       " samples and " + std::to_string(d) +
                       " inputs; enable ridge damping (lambda > 0)");

  RowMatrix x(idx(n), idx(d + 1));  // last column: bias
  RowMatrix y(idx(n), idx(out));
  for (std::size_t i = 0; i < n; ++i) {
    x.row(idx(i)).head(idx(d)) = model.encode_input(train[i]).raw().transpose();
    x(idx(i), idx(d)) = 1.0;
    y.row(idx(i)) = train[i].target.raw().transpose();
  }

  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += spec.ridge_lambda;
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (spec.ridge_lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw NumericError(
          "normal equations are singular; enable ridge damping (lambda > 0)");
  }
  Eigen::MatrixXd beta = solver.solve(x.transpose() * y);  // (d+1) x out

  std::vector<Parameter*> params = model.parameters();  // {weight, bias}
  params[0]->value().as_matrix(out, d) = beta.topRows(idx(d)).transpose();
  params[1]->value().raw() = beta.row(idx(d)).transpose();
  return model;
}

double gradient_check(SurrogateModel& model, const std::vector<WindowSample>& batch,
                      double epsilon) {
  if (batch.empty()) throw ArgumentError("gradient check needs at least one sample");
  std::vector<Parameter*> params = model.parameters();
  if (params.empty()) return 0.0;  // vacuous maximum
  auto loss_fn = [&](Tape& tape) {
    ForwardContext ctx{&tape, false, nullptr};
    std::vector<VarPtr> preds;
    preds.reserve(batch.size());
    Tensor targets({batch.size(), model.spec().output_dim()});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      preds.push_back(model.forward_sample(ctx, batch[b]));
      targets.as_matrix().row(idx(b)) = batch[b].target.raw().transpose();
    }
    return mse_loss(&tape, stack_rows(&tape, preds), targets);
  };
  return max_relative_gradient_error(params, loss_fn, epsilon);
}

}  // namespace stagecast
