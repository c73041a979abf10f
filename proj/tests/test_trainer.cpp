#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stagecast/checkpoint.hpp"
#include "stagecast/trainer.hpp"
#include "stagecast/window.hpp"

#include "support/test_util.hpp"

using namespace stagecast;
using namespace stagecast::testutil;

namespace {

std::vector<WindowSample> toy_training_data(std::size_t length, std::size_t w,
                                            std::size_t k) {
  const FeatureSchema schema = toy_schema();
  TimeSeriesFrame raw = synthetic_frame(length, schema, 0);
  Normalizer norm = Normalizer::fit(raw);
  return build_windows(norm.apply(raw), w, k);
}

ArchitectureSpec tiny_mlp_spec() {
  ArchitectureSpec spec = ArchitectureSpec::defaults(ModelKind::Mlp, 8, 2, toy_schema());
  spec.hidden_sizes = {16};
  spec.dropout = 0.0;
  return spec;
}

}  // namespace

TEST_CASE("mse hand values") {
  CHECK(mse(Tensor::values({1, 2, 3}), Tensor::values({1, 2, 3})) == 0.0);
  CHECK(mse(Tensor::values({0, 0}), Tensor::values({1, 3})) ==
        doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(mse(Tensor::values({1, 2}), Tensor::values({1, 2, 3})),
                  DimensionError);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.validate();
  SUBCASE("validation fraction") {
    cfg.validation_fraction = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }
  SUBCASE("batch size") {
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }
  SUBCASE("patience") {
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }
  SUBCASE("negative learning rate") {
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  }
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  auto data = toy_training_data(60, 8, 2);
  SurrogateModel model = build_model(tiny_mlp_spec(), 7);
  std::vector<Tensor> before;
  for (Parameter* p : model.parameters()) before.push_back(p->value());
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.max_epochs = 3;
  cfg.patience = 5;
  cfg.batch_size = 256;  // single batch, so reshuffling cannot regroup losses
  TrainingHistory hist = train(model, data, cfg);
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    CHECK(params[i]->value().raw() == before[i].raw());
  REQUIRE(hist.epochs.size() == 3);
  CHECK(hist.epochs[1].train_loss == doctest::Approx(hist.epochs[0].train_loss));
  CHECK(hist.epochs[2].val_loss == hist.epochs[0].val_loss);
}

TEST_CASE("training is bit-deterministic per seed") {
  auto data = toy_training_data(80, 8, 2);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.seed = 99;
  auto run = [&](std::uint64_t seed) {
    TrainConfig c = cfg;
    c.seed = seed;
    SurrogateModel model = build_model(tiny_mlp_spec(), 7);
    train(model, data, c);
    std::vector<Eigen::VectorXd> out;
    for (Parameter* p : model.parameters()) out.push_back(p->value().raw());
    return out;
  };
  auto a = run(99), b = run(99), c = run(100);
  REQUIRE(a.size() == b.size());
  bool same = true, different = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && (a[i] == b[i]);
    different = different || (a[i] != c[i]);
  }
  CHECK(same);
  CHECK(different);
}

TEST_CASE("training drives the loss down on an easy task") {
  auto data = toy_training_data(120, 8, 2);
  SurrogateModel model = build_model(tiny_mlp_spec(), 7);
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.max_epochs = 120;
  cfg.patience = 120;
  TrainingHistory hist = train(model, data, cfg);
  CHECK(hist.best_val_loss < hist.epochs.front().val_loss * 0.5);
  // The restored parameters really are the best-epoch ones.
  for (const EpochRecord& r : hist.epochs) CHECK(hist.best_val_loss <= r.val_loss);
}

TEST_CASE("divergence raises a numeric error naming the batch") {
  auto data = toy_training_data(80, 8, 2);
  ArchitectureSpec spec =
      ArchitectureSpec::defaults(ModelKind::LinearRegression, 8, 2, toy_schema());
  SurrogateModel model = build_model(spec, 7);
  TrainConfig cfg;
  cfg.learning_rate = 1e160;
  cfg.max_epochs = 4;
  CHECK_THROWS_AS(train(model, data, cfg), NumericError);
}

TEST_CASE("empty data and untrainable kinds are rejected") {
  TrainConfig cfg;
  SurrogateModel model = build_model(tiny_mlp_spec(), 7);
  CHECK_THROWS_AS(train(model, {}, cfg), ArgumentError);
  ArchitectureSpec pspec =
      ArchitectureSpec::defaults(ModelKind::Persistence, 8, 2, toy_schema());
  SurrogateModel p = build_model(pspec, 7);
  auto data = toy_training_data(40, 8, 2);
  CHECK_THROWS_AS(train(p, data, cfg), ArgumentError);
}

TEST_CASE("gradient clipping bounds the global norm") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Parameter a("a", Tensor({3, 4}));
    Parameter b("b", Tensor({7}));
    for (std::size_t i = 0; i < a.grad().size(); ++i)
      a.grad()[i] = rng.next_uniform(-10, 10);
    for (std::size_t i = 0; i < b.grad().size(); ++i)
      b.grad()[i] = rng.next_uniform(-10, 10);
    std::vector<Parameter*> params{&a, &b};
    const double threshold = rng.next_uniform(0.1, 20.0);
    const Eigen::VectorXd ga = a.grad().raw();
    const double pre = clip_gradients(params, threshold);
    const double post = std::sqrt(a.grad().raw().squaredNorm() +
                                  b.grad().raw().squaredNorm());
    CHECK(post <= threshold + 1e-9);
    CHECK(pre >= post - 1e-12);
    if (pre <= threshold) CHECK(a.grad().raw() == ga);  // untouched below the bound
    else                  CHECK(a.grad().raw().isApprox(ga * (threshold / pre), 1e-12));
  }
}

TEST_CASE("checkpoint round trip reproduces predictions bit for bit") {
  auto data = toy_training_data(80, 8, 2);
  SurrogateModel model = build_model(tiny_mlp_spec(), 7);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  train(model, data, cfg);
  model.set_normalizer(Normalizer::fit(synthetic_frame(80, toy_schema(), 0)));

  const auto path = std::filesystem::temp_directory_path() / "stagecast_ckpt.json";
  save_checkpoint(model, path.string());
  SurrogateModel loaded = load_checkpoint(path.string());
  std::filesystem::remove(path);

  CHECK(loaded.spec().kind == model.spec().kind);
  CHECK(loaded.seed() == model.seed());
  Tensor a = model.predict(data);
  Tensor b = loaded.predict(data);
  CHECK(a.raw() == b.raw());
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(loaded.normalizer().min_of(c) == model.normalizer().min_of(c));
    CHECK(loaded.normalizer().max_of(c) == model.normalizer().max_of(c));
  }
}

TEST_CASE("checkpoint i/o errors") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.json"), DataError);
  const auto path = std::filesystem::temp_directory_path() / "stagecast_bad.json";
  {
    std::ofstream out(path);
    out << "{\"format\": \"something-else\"}";
  }
  CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  {
    std::ofstream out(path);
    out << "not json at all";
  }
  CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("history csv export") {
  TrainingHistory hist;
  hist.epochs = {{0.5, 0.6, 0.01}, {0.25, 0.3, 0.01}};
  hist.best_epoch = 1;
  hist.best_val_loss = 0.3;
  const auto path = std::filesystem::temp_directory_path() / "stagecast_hist.csv";
  write_history_csv(hist, path.string());
  std::ifstream in(path);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  std::filesystem::remove(path);
  CHECK(header == "epoch,train_loss,val_loss,seconds");
  CHECK(row0.substr(0, 6) == "0,0.5,");
  CHECK(row1.substr(0, 7) == "1,0.25,");
}
