#include <doctest.h>

#include "stagecast/gradcheck.hpp"
#include "stagecast/model.hpp"

#include "support/test_util.hpp"

using namespace stagecast;
using namespace stagecast::testutil;

namespace {

constexpr double kEps = 1e-4;  // large enough to keep fd roundoff below kTol
constexpr double kTol = 1e-5;

ArchitectureSpec toy_spec(ModelKind kind) {
  const FeatureSchema schema = toy_schema();
  ArchitectureSpec spec = ArchitectureSpec::defaults(kind, 5, 3, schema);
  spec.hidden_sizes = {6, 5};
  spec.dropout = 0.0;  // dropout masks are resampled per pass, skip for checks
  spec.recurrent_hidden = 4;
  if (kind == ModelKind::Cnn) spec.conv_blocks = {{3, 3, 2}};
  if (kind == ModelKind::Rcnn) spec.conv_blocks = {{3, 3, 2}};
  return spec;
}

}  // namespace

TEST_CASE("gradient check per architecture at toy size") {
  const FeatureSchema schema = toy_schema();
  const auto batch = random_batch(2, 5, 3, schema, 42);
  for (ModelKind kind : {ModelKind::Mlp, ModelKind::Rnn, ModelKind::Lstm,
                         ModelKind::Cnn, ModelKind::Rcnn}) {
    CAPTURE(model_kind_name(kind));
    SurrogateModel model = build_model(toy_spec(kind), 11);
    CHECK(gradient_check(model, batch, kEps) < kTol);
  }
}

TEST_CASE("gradient check covers recurrent accumulation over 5 timesteps") {
  // w + k = 5 + 3 > 5 steps of BPTT for both recurrent kinds.
  const FeatureSchema schema = toy_schema();
  const auto batch = random_batch(1, 5, 3, schema, 7);
  for (ModelKind kind : {ModelKind::Rnn, ModelKind::Lstm}) {
    SurrogateModel model = build_model(toy_spec(kind), 23);
    CHECK(gradient_check(model, batch, kEps) < kTol);
  }
}

TEST_CASE("gradient check epsilon domain") {
  const FeatureSchema schema = toy_schema();
  const auto batch = random_batch(1, 5, 3, schema, 3);
  SurrogateModel model = build_model(toy_spec(ModelKind::Mlp), 5);
  CHECK_THROWS_AS(gradient_check(model, batch, 0.0), ArgumentError);
  CHECK_THROWS_AS(gradient_check(model, batch, 1e-2), ArgumentError);
}

TEST_CASE("zero-parameter model reports a vacuous zero") {
  const FeatureSchema schema = toy_schema();
  ArchitectureSpec spec = ArchitectureSpec::defaults(ModelKind::Persistence, 5, 3, schema);
  SurrogateModel model = build_model(spec, 1);
  const auto batch = random_batch(1, 5, 3, schema, 3);
  CHECK(gradient_check(model, batch, kEps) == 0.0);
}

TEST_CASE("non-finite loss is reported as a numeric error") {
  Parameter w("W", Tensor::values({1e308}).reshaped({1, 1}));
  Parameter b("b", Tensor::values({1e308}));
  auto loss_fn = [&](Tape& tape) {
    VarPtr x = std::make_shared<Var>(Tensor::values({1e308}));
    VarPtr y = dense_forward(&tape, x, w, b, Activation::Identity);
    return mse_loss(&tape, y, Tensor::values({0.0}));
  };
  CHECK_THROWS_AS(max_relative_gradient_error({&w, &b}, loss_fn, 1e-6), NumericError);
}

TEST_CASE("layer output shapes match their declared geometry") {
  // Property-style sweep over random valid shapes.
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t t = 3 + rng.next_below(10);
    const std::size_t f = 1 + rng.next_below(5);
    const std::size_t filters = 1 + rng.next_below(4);
    const std::size_t width = 1 + rng.next_below(t);
    const std::size_t stride = 1 + rng.next_below(3);

    Tensor x({t, f});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.next_uniform(-1, 1);
    VarPtr in = std::make_shared<Var>(x);

    Parameter ker("K", Tensor::zeros({filters, width, f}));
    Parameter bias("b", Tensor::zeros({filters}));
    Tape tape;
    VarPtr conv = conv1d_forward(&tape, in, ker, bias, stride, Activation::Relu);
    const std::size_t t_conv = (t - width) / stride + 1;
    CHECK(conv->value.shape() == std::vector<std::size_t>{t_conv, filters});

    const std::size_t window = 1 + rng.next_below(t_conv);
    VarPtr pooled = maxpool1d(&tape, conv, window, window);
    const std::size_t t_pool = (t_conv - window) / window + 1;
    CHECK(pooled->value.shape() == std::vector<std::size_t>{t_pool, filters});
  }
}

TEST_CASE("forward output stays finite for finite inputs") {
  const FeatureSchema schema = toy_schema();
  const auto batch = random_batch(3, 5, 3, schema, 99);
  for (ModelKind kind : {ModelKind::Mlp, ModelKind::Rnn, ModelKind::Lstm,
                         ModelKind::Cnn, ModelKind::Rcnn}) {
    SurrogateModel model = build_model(toy_spec(kind), 31);
    Tensor out = model.predict(batch);
    CHECK(out.all_finite());
  }
}
