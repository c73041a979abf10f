#pragma once

#include "stagecast/model.hpp"

namespace stagecast {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;          // early-stop window, epochs
  double validation_fraction = 0.1;   // chronological tail of the training data
  std::uint64_t seed = 1;
  double beta1 = 0.9;                 // adaptive-moment coefficients
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 0.0;             // 0 disables global-norm clipping
  bool verbose = false;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // index into epochs
  double best_val_loss = 0.0;
};

/// Scalar MSE between same-shape tensors (non-tape convenience overload; the
/// differentiable version lives in ops.hpp).
double mse(const Tensor& pred, const Tensor& target);

/// Rescales all gradients so their global L2 norm is at most clip_norm;
/// returns the pre-clip norm. No-op when clip_norm <= 0.
double clip_gradients(const std::vector<Parameter*>& params, double clip_norm);

/// Deterministic mini-batch training with adaptive-moment updates, optional
/// global-norm gradient clipping, chronological validation split, and early
/// stopping. Restores the best-validation parameters before returning.
TrainingHistory train(SurrogateModel& model, const std::vector<WindowSample>& data,
                      const TrainConfig& config);

/// Writes (epoch, train_loss, val_loss, seconds) rows.
void write_history_csv(const TrainingHistory& history, const std::string& path);

}  // namespace stagecast
