#include "stagecast/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>

namespace stagecast {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

struct AdamState {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  std::size_t step = 0;

  explicit AdamState(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) {
      m.push_back(Eigen::VectorXd::Zero(p->value().raw().size()));
      v.push_back(Eigen::VectorXd::Zero(p->value().raw().size()));
    }
  }

  void update(const std::vector<Parameter*>& params, const TrainConfig& cfg) {
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Eigen::VectorXd& g = params[i]->grad().raw();
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i].array().matrix() +
             (1.0 - cfg.beta2) * g.array().square().matrix();
      params[i]->value().raw().array() -=
          cfg.learning_rate * (m[i].array() / bc1) /
          ((v[i].array() / bc2).sqrt() + cfg.adam_epsilon);
    }
  }
};

// Mean MSE over a sample range, inference mode.
double evaluate_loss(SurrogateModel& model, const std::vector<WindowSample>& data,
                     std::size_t begin, std::size_t end) {
  if (begin >= end) return 0.0;
  ForwardContext ctx;
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    VarPtr y = model.forward_sample(ctx, data[i]);
    total += (y->value.raw() - data[i].target.raw()).squaredNorm() /
             static_cast<double>(y->value.size());
  }
  return total / static_cast<double>(end - begin);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(validation_fraction >= 0.0 && validation_fraction < 0.5))
    throw ArgumentError("validation fraction must be in [0, 0.5)");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (patience < 1) throw ArgumentError("patience must be >= 1");
  if (max_epochs < 1) throw ArgumentError("max epochs must be >= 1");
  if (learning_rate < 0.0) throw ArgumentError("learning rate must be nonnegative");
}

double clip_gradients(const std::vector<Parameter*>& params, double clip_norm) {
  double sq = 0.0;
  for (Parameter* p : params) sq += p->grad().raw().squaredNorm();
  const double norm = std::sqrt(sq);
  if (clip_norm <= 0.0) return norm;
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (Parameter* p : params) p->grad().raw() *= scale;
  }
  return norm;
}

double mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  return (pred.raw() - target.raw()).squaredNorm() /
         static_cast<double>(pred.size());
}

TrainingHistory train(SurrogateModel& model, const std::vector<WindowSample>& data,
                      const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ArgumentError("train called with no samples");
  if (model.spec().kind == ModelKind::Persistence)
    throw ArgumentError("persistence baseline is not trainable");

  const std::size_t n_val =
      static_cast<std::size_t>(config.validation_fraction *
                               static_cast<double>(data.size()));
  const std::size_t n_train = data.size() - n_val;
  if (n_train == 0) throw ArgumentError("validation split leaves no training samples");

  std::vector<Parameter*> params = model.parameters();
  AdamState adam(params);
  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

  model.set_training_mode(true);
  TrainingHistory history;
  std::vector<Tensor> best_params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    // Fisher-Yates with the config seed; deterministic across runs.
    for (std::size_t i = n_train; i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t stop = std::min(start + config.batch_size, n_train);
      for (Parameter* p : params) p->reset_grad();
      Tape tape;
      ForwardContext ctx{&tape, true, &dropout_rng};
      std::vector<VarPtr> preds;
      Tensor targets({stop - start, model.spec().output_dim()});
      for (std::size_t i = start; i < stop; ++i) {
        preds.push_back(model.forward_sample(ctx, data[order[i]]));
        targets.as_matrix().row(idx(i - start)) =
            data[order[i]].target.raw().transpose();
      }
      VarPtr loss = mse_loss(&tape, stack_rows(&tape, preds), targets);
      if (!std::isfinite(loss->value[0]))
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(n_batches));
      tape.backward(loss, Tensor::scalar(1.0));
      clip_gradients(params, config.clip_norm);
      adam.update(params, config);
      epoch_loss += loss->value[0];
      ++n_batches;
    }

    model.set_training_mode(false);
    const double val_loss = n_val > 0
                                ? evaluate_loss(model, data, n_train, data.size())
                                : epoch_loss / static_cast<double>(n_batches);
    model.set_training_mode(true);

    EpochRecord rec;
    rec.train_loss = epoch_loss / static_cast<double>(n_batches);
    rec.val_loss = val_loss;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    history.epochs.push_back(rec);
    if (config.verbose)
      std::fprintf(stderr, "epoch %zu: train %.6g val %.6g (%.2fs)\n", epoch,
                   rec.train_loss, rec.val_loss, rec.seconds);

    if (val_loss < best_val) {
      best_val = val_loss;
      history.best_epoch = epoch;
      since_best = 0;
      best_params.clear();
      for (Parameter* p : params) best_params.push_back(p->value());
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  model.set_training_mode(false);
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i]->value() = best_params[i];
  history.best_val_loss = best_val;
  return history;
}

void write_history_csv(const TrainingHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write history: " + path);
  out << "epoch,train_loss,val_loss,seconds\n";
  char buf[128];
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const EpochRecord& r = history.epochs[e];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.6f\n", e, r.train_loss,
                  r.val_loss, r.seconds);
    out << buf;
  }
}

}  // namespace stagecast
