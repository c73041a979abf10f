#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stagecast/layers.hpp"
#include "stagecast/window.hpp"

namespace stagecast {

enum class ModelKind { Mlp, Rnn, Lstm, Cnn, Rcnn, LinearRegression, Persistence };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct ConvBlockSpec {
  std::size_t filters = 64;
  std::size_t width = 3;
  std::size_t pool_width = 2;
};

/// Geometry and hyperparameters of one surrogate architecture.
struct ArchitectureSpec {
  ModelKind kind = ModelKind::Rcnn;
  std::size_t w = 72;  // past window, hours
  std::size_t k = 24;  // forecast lead, hours

  // Input geometry, taken from the feature schema.
  std::size_t n_features = 0;
  std::size_t n_future = 0;
  std::vector<std::size_t> target_columns;  // indices into the feature list
  std::vector<std::size_t> future_columns;  // indices of future-known features

  // Hyperparameters (conventional small defaults; all configurable).
  std::vector<std::size_t> hidden_sizes{128, 128};  // MLP
  double dropout = 0.2;                             // MLP
  std::size_t recurrent_hidden = 64;                // RNN / LSTM / RCNN
  std::vector<ConvBlockSpec> conv_blocks;           // CNN / RCNN
  double ridge_lambda = 0.0;                        // linear regression
  std::vector<std::string> rcnn_stages{"recurrent", "conv"};

  std::size_t n_targets() const { return target_columns.size(); }
  std::size_t output_dim() const { return k * n_targets(); }
  std::size_t flat_input_dim() const { return w * n_features + k * n_future; }
  /// Sequence models see (w + k) rows of all features plus a future-row flag.
  std::size_t sequence_length() const { return w + k; }
  std::size_t sequence_channels() const { return n_features + 1; }

  static ArchitectureSpec defaults(ModelKind kind, std::size_t w, std::size_t k,
                                   const FeatureSchema& schema);
};

/// An ordered composition of parameterized layers mapping a WindowSample to a
/// (k x n_targets) stage prediction in normalized space.
class SurrogateModel {
 public:
  SurrogateModel(ArchitectureSpec spec, std::uint64_t seed);

  const ArchitectureSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Parameter*> parameters();

  const Normalizer& normalizer() const { return normalizer_; }
  void set_normalizer(Normalizer n) { normalizer_ = std::move(n); }

  bool training_mode() const { return training_; }
  void set_training_mode(bool training) { training_ = training; }

  /// Architecture-specific input encoding: flattened past + future blocks for
  /// MLP/LR, a (w+k) x (features+1) matrix with zeroed target channels and a
  /// future-indicator column for the sequence models.
  Tensor encode_input(const WindowSample& sample) const;

  /// One sample through the layer stack; rank-1 output of length k*targets.
  VarPtr forward_sample(ForwardContext& ctx, const WindowSample& sample);

  /// Batched inference, nothing recorded. Output shape (batch, k, targets).
  Tensor predict(const std::vector<WindowSample>& batch);

  /// Direct access for the closed-form linear-regression fit.
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

 private:
  ArchitectureSpec spec_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Layer>> layers_;
  Normalizer normalizer_;
  bool training_ = false;
};

/// Seeded construction of any architecture; identical seeds give identical
/// initial parameters.
SurrogateModel build_model(const ArchitectureSpec& spec, std::uint64_t seed);

/// Repeats the last observed value of each target across the horizon.
Tensor persistence_baseline(const std::vector<WindowSample>& batch,
                            const std::vector<std::size_t>& target_columns);

/// Closed-form least squares from the flattened input to the k x targets
/// output, with optional ridge damping.
SurrogateModel fit_linear_regression(const std::vector<WindowSample>& train,
                                     const ArchitectureSpec& spec,
                                     std::uint64_t seed = 0);

/// Max relative error between tape gradients and central finite differences
/// of the batch MSE loss; 0 for models with no learnable parameters.
double gradient_check(SurrogateModel& model, const std::vector<WindowSample>& batch,
                      double epsilon);

}  // namespace stagecast
