#include <doctest.h>

#include <cmath>

#include "stagecast/ops.hpp"
#include "stagecast/layers.hpp"

using namespace stagecast;

namespace {

VarPtr leaf(Tensor t) { return std::make_shared<Var>(std::move(t)); }

Parameter matrix_param(const char* name, std::size_t rows, std::size_t cols,
                       std::initializer_list<double> vals) {
  Tensor t = Tensor::values(vals);
  return Parameter(name, t.reshaped({rows, cols}));
}

}  // namespace

TEST_CASE("dense forward matches hand evaluation") {
  SUBCASE("identity weights pass the input through") {
    Parameter w = matrix_param("W", 2, 2, {1, 0, 0, 1});
    Parameter b("b", Tensor::zeros({2}));
    Tape tape;
    VarPtr y = dense_forward(&tape, leaf(Tensor::values({3, -1})), w, b,
                             Activation::Identity);
    CHECK(y->value[0] == doctest::Approx(3.0));
    CHECK(y->value[1] == doctest::Approx(-1.0));
  }
  SUBCASE("sigmoid of the affine sum") {
    Parameter w = matrix_param("W", 1, 2, {1, 1});
    Parameter b("b", Tensor::values({1}));
    Tape tape;
    VarPtr y = dense_forward(&tape, leaf(Tensor::values({1, 1})), w, b,
                             Activation::Sigmoid);
    // independent scalar evaluation of sigma(3)
    CHECK(y->value[0] == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-12));
  }
  SUBCASE("tanh at zero") {
    Parameter w = matrix_param("W", 1, 1, {2});
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr y =
        dense_forward(&tape, leaf(Tensor::values({0})), w, b, Activation::Tanh);
    CHECK(y->value[0] == 0.0);
  }
  SUBCASE("shape mismatch names both shapes") {
    Parameter w = matrix_param("W", 2, 2, {1, 0, 0, 1});
    Parameter b("b", Tensor::zeros({2}));
    Tape tape;
    CHECK_THROWS_AS(
        dense_forward(&tape, leaf(Tensor::values({1, 2, 3})), w, b,
                      Activation::Identity),
        DimensionError);
  }
}

TEST_CASE("rnn step follows the concatenated update") {
  SUBCASE("all-zero parameters give a zero state") {
    Parameter w("W", Tensor::zeros({1, 2}));
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr s = rnn_step(&tape, leaf(Tensor::values({4.2})),
                        leaf(Tensor::values({-1.7})), w, b);
    CHECK(s->value[0] == 0.0);
  }
  SUBCASE("input channel only") {
    Parameter w = matrix_param("W", 1, 2, {1, 0});
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr s = rnn_step(&tape, leaf(Tensor::values({0.5})),
                        leaf(Tensor::values({0.7})), w, b);
    CHECK(s->value[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
  }
  SUBCASE("masked input channel") {
    Parameter w = matrix_param("W", 1, 2, {0, 1});
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr s = rnn_step(&tape, leaf(Tensor::values({9.9})),
                        leaf(Tensor::values({0})), w, b);
    CHECK(s->value[0] == 0.0);
  }
  SUBCASE("column mismatch throws") {
    Parameter w = matrix_param("W", 1, 3, {1, 0, 0});
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    CHECK_THROWS_AS(rnn_step(&tape, leaf(Tensor::values({1})),
                             leaf(Tensor::values({1})), w, b),
                    DimensionError);
  }
}

namespace {

LstmParams zero_lstm(std::size_t m, std::size_t n) {
  LstmParams p;
  p.w_forget = Parameter("Wf", Tensor::zeros({n, m + n}));
  p.w_input = Parameter("Wi", Tensor::zeros({n, m + n}));
  p.w_cell = Parameter("WC", Tensor::zeros({n, m + n}));
  p.w_output = Parameter("WO", Tensor::zeros({n, m + n}));
  p.b_forget = Parameter("bf", Tensor::zeros({n}));
  p.b_input = Parameter("bi", Tensor::zeros({n}));
  p.b_cell = Parameter("bC", Tensor::zeros({n}));
  p.b_output = Parameter("bO", Tensor::zeros({n}));
  return p;
}

}  // namespace

TEST_CASE("lstm step gate arithmetic") {
  SUBCASE("zero parameters, zero cell") {
    LstmParams p = zero_lstm(1, 1);
    Tape tape;
    auto [s, c] = lstm_step(&tape, leaf(Tensor::values({0.3})),
                            leaf(Tensor::values({0})), leaf(Tensor::values({0})), p);
    CHECK(s->value[0] == 0.0);
    CHECK(c->value[0] == 0.0);
  }
  SUBCASE("zero parameters, unit cell: half-open gates") {
    LstmParams p = zero_lstm(1, 1);
    Tape tape;
    auto [s, c] = lstm_step(&tape, leaf(Tensor::values({0})),
                            leaf(Tensor::values({0})), leaf(Tensor::values({1})), p);
    CHECK(c->value[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s->value[0] == doctest::Approx(std::tanh(0.5) * 0.5).epsilon(1e-12));
  }
  SUBCASE("saturated forget gate preserves the cell") {
    LstmParams p = zero_lstm(1, 1);
    p.b_forget.value()[0] = 20.0;
    const double cell_in = 0.83;
    Tape tape;
    auto [s, c] =
        lstm_step(&tape, leaf(Tensor::values({0})), leaf(Tensor::values({0})),
                  leaf(Tensor::values({cell_in})), p);
    // 1 - sigma(20) < 1e-8, checked independently
    CHECK(std::abs(c->value[0] - cell_in) < 1e-8);
  }
  SUBCASE("weight shape mismatch throws") {
    LstmParams p = zero_lstm(2, 1);
    Tape tape;
    CHECK_THROWS_AS(lstm_step(&tape, leaf(Tensor::values({1})),
                              leaf(Tensor::values({0})), leaf(Tensor::values({0})), p),
                    DimensionError);
  }
}

TEST_CASE("conv1d valid convolution") {
  SUBCASE("width-1 identity kernel") {
    Parameter ker("K", Tensor({1, 1, 1}, Eigen::VectorXd::Ones(1)));
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr x = leaf(Tensor::values({1, 2, 3}).reshaped({3, 1}));
    VarPtr y = conv1d_forward(&tape, x, ker, b, 1, Activation::Identity);
    CHECK(y->value.shape() == std::vector<std::size_t>{3, 1});
    for (std::size_t i = 0; i < 3; ++i) CHECK(y->value[i] == x->value[i]);
  }
  SUBCASE("sliding difference kernel") {
    Parameter ker("K", Tensor::values({1, 0, -1}).reshaped({1, 3, 1}));
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr y = conv1d_forward(&tape, leaf(Tensor::values({1, 2, 3, 4}).reshaped({4, 1})),
                              ker, b, 1, Activation::Identity);
    REQUIRE(y->value.shape() == std::vector<std::size_t>{2, 1});
    CHECK(y->value[0] == doctest::Approx(-2.0));
    CHECK(y->value[1] == doctest::Approx(-2.0));
  }
  SUBCASE("constant input under a differencing kernel") {
    Parameter ker("K", Tensor::values({1, -1}).reshaped({1, 2, 1}));
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    VarPtr y = conv1d_forward(&tape, leaf(Tensor::values({5, 5, 5}).reshaped({3, 1})),
                              ker, b, 1, Activation::Identity);
    CHECK(y->value[0] == 0.0);
    CHECK(y->value[1] == 0.0);
  }
  SUBCASE("kernel wider than the input is an error") {
    Parameter ker("K", Tensor::zeros({1, 5, 1}));
    Parameter b("b", Tensor::zeros({1}));
    Tape tape;
    CHECK_THROWS_AS(conv1d_forward(&tape, leaf(Tensor::zeros({3, 1})), ker, b, 1,
                                   Activation::Identity),
                    DimensionError);
  }
}

TEST_CASE("maxpool1d") {
  SUBCASE("window 2 stride 2") {
    Tape tape;
    VarPtr y = maxpool1d(&tape, leaf(Tensor::values({1, 3, 2, 5}).reshaped({4, 1})), 2, 2);
    REQUIRE(y->value.shape() == std::vector<std::size_t>{2, 1});
    CHECK(y->value[0] == 3.0);
    CHECK(y->value[1] == 5.0);
  }
  SUBCASE("constant input stays constant") {
    Tape tape;
    VarPtr y = maxpool1d(&tape, leaf(Tensor::values({7, 7, 7, 7}).reshaped({4, 1})), 2, 1);
    for (std::size_t i = 0; i < y->value.size(); ++i) CHECK(y->value[i] == 7.0);
  }
  SUBCASE("full window reduces to the global maximum") {
    Tape tape;
    VarPtr y = maxpool1d(&tape, leaf(Tensor::values({2, 9, 4}).reshaped({3, 1})), 3, 1);
    REQUIRE(y->value.size() == 1);
    CHECK(y->value[0] == 9.0);
  }
  SUBCASE("window larger than input is an error") {
    Tape tape;
    CHECK_THROWS_AS(maxpool1d(&tape, leaf(Tensor::zeros({3, 1})), 4, 1), DimensionError);
  }
  SUBCASE("backward conserves each window's gradient and breaks ties first") {
    Tape tape;
    VarPtr x = leaf(Tensor::values({1, 1, 4, 4}).reshaped({4, 1}));
    VarPtr y = maxpool1d(&tape, x, 2, 2);
    tape.backward(y, Tensor::values({2, 3}).reshaped({2, 1}));
    // Ties route to the first occurrence; each window's gradient is conserved.
    CHECK(x->grad[0] == 2.0);
    CHECK(x->grad[1] == 0.0);
    CHECK(x->grad[2] == 3.0);
    CHECK(x->grad[3] == 0.0);
  }
}

TEST_CASE("backward pass bookkeeping") {
  SUBCASE("linear map jacobian: seeded row gets the input, others stay zero") {
    Parameter w("W", Tensor::zeros({2, 3}));
    Parameter b("b", Tensor::zeros({2}));
    VarPtr x = leaf(Tensor::values({1, 2, 3}));
    Tape tape;
    VarPtr y = dense_forward(&tape, x, w, b, Activation::Identity);
    tape.backward(y, Tensor::values({0, 1}));  // seed e_1
    CHECK(w.grad().at(1, 0) == 1.0);
    CHECK(w.grad().at(1, 1) == 2.0);
    CHECK(w.grad().at(1, 2) == 3.0);
    CHECK(w.grad().at(0, 0) == 0.0);
    CHECK(w.grad().at(0, 1) == 0.0);
    CHECK(w.grad().at(0, 2) == 0.0);
  }
  SUBCASE("disconnected parameters keep zero gradients") {
    Parameter w1("W1", Tensor::zeros({1, 1}));
    Parameter b1("b1", Tensor::zeros({1}));
    Parameter w2("W2", Tensor::zeros({1, 1}));
    Parameter b2("b2", Tensor::zeros({1}));
    Tape tape;
    VarPtr y1 = dense_forward(&tape, leaf(Tensor::values({1})), w1, b1,
                              Activation::Identity);
    dense_forward(&tape, leaf(Tensor::values({1})), w2, b2, Activation::Identity);
    tape.backward(y1, Tensor::values({1}));
    CHECK(b1.grad()[0] == 1.0);
    CHECK(b2.grad()[0] == 0.0);
  }
  SUBCASE("backward without a forward pass is an error") {
    Tape tape;
    VarPtr v = leaf(Tensor::values({1}));
    CHECK_THROWS_AS(tape.backward(v, Tensor::values({1})), ArgumentError);
  }
  SUBCASE("backward is linear in the seed") {
    Rng rng(7);
    Parameter w("W", Tensor::zeros({3, 3}));
    Parameter b("b", Tensor::zeros({3}));
    for (std::size_t i = 0; i < 9; ++i) w.value()[i] = rng.next_uniform(-1, 1);
    VarPtr x = leaf(Tensor::values({0.3, -0.4, 0.9}));

    auto grads_for = [&](double scale) {
      w.reset_grad();
      b.reset_grad();
      Tape tape;
      VarPtr y = dense_forward(&tape, x, w, b, Activation::Tanh);
      Tensor seed = Tensor::values({0.2, -1.0, 0.5});
      seed.raw() *= scale;
      x->grad.set_zero();
      tape.backward(y, seed);
      return w.grad();
    };
    Tensor g1 = grads_for(1.0);
    Tensor g3 = grads_for(3.0);
    for (std::size_t i = 0; i < g1.size(); ++i)
      CHECK(std::abs(g3[i] - 3.0 * g1[i]) < 1e-12);
  }
  SUBCASE("identical inputs give bit-identical outputs and gradients") {
    auto run = [&]() {
      Parameter w("W", Tensor::values({0.1, -0.2, 0.3, 0.4}).reshaped({2, 2}));
      Parameter b("b", Tensor::values({0.05, -0.05}));
      Tape tape;
      VarPtr x = leaf(Tensor::values({0.7, -1.1}));
      VarPtr y = dense_forward(&tape, x, w, b, Activation::Sigmoid);
      tape.backward(y, Tensor::values({1, 1}));
      return std::make_pair(y->value, w.grad());
    };
    auto [y1, g1] = run();
    auto [y2, g2] = run();
    CHECK(y1.raw() == y2.raw());
    CHECK(g1.raw() == g2.raw());
  }
}

TEST_CASE("mse loss") {
  VarPtr p = leaf(Tensor::values({0, 0}));
  Tape tape;
  VarPtr l = mse_loss(&tape, p, Tensor::values({1, 3}));
  CHECK(l->value[0] == doctest::Approx(5.0));  // (1 + 9) / 2
  tape.backward(l, Tensor::scalar(1.0));
  // gradient 2(pred - target)/N
  CHECK(p->grad[0] == doctest::Approx(-1.0));
  CHECK(p->grad[1] == doctest::Approx(-3.0));

  SUBCASE("identical tensors give zero loss") {
    Tape t2;
    VarPtr q = leaf(Tensor::values({1.5, -2.5}));
    CHECK(mse_loss(&t2, q, Tensor::values({1.5, -2.5}))->value[0] == 0.0);
  }
  SUBCASE("shape mismatch throws") {
    Tape t2;
    CHECK_THROWS_AS(mse_loss(&t2, leaf(Tensor::values({1})), Tensor::values({1, 2})),
                    DimensionError);
  }
}

TEST_CASE("dropout is identity at rate zero and seed-deterministic otherwise") {
  VarPtr x = leaf(Tensor::values({1, 2, 3, 4, 5, 6, 7, 8}));
  Rng rng1(5), rng2(5);
  Tape tape;
  VarPtr a = dropout(&tape, x, 0.5, rng1);
  VarPtr b = dropout(&tape, x, 0.5, rng2);
  CHECK(a->value.raw() == b->value.raw());
  Rng rng3(5);
  CHECK(dropout(&tape, x, 0.0, rng3) == x);
}
