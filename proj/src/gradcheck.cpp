#include "stagecast/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "stagecast/errors.hpp"

namespace stagecast {

double max_relative_gradient_error(const std::vector<Parameter*>& params,
                                   const std::function<VarPtr(Tape&)>& loss_fn,
                                   double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1e-3)
    throw ArgumentError("gradient check epsilon must be in (0, 1e-3]");

  for (Parameter* p : params) p->reset_grad();
  Tape tape;
  VarPtr loss = loss_fn(tape);
  if (loss->value.size() != 1)
    throw DimensionError("gradient check loss must be scalar, got " +
                         loss->value.shape_str());
  if (!std::isfinite(loss->value[0]))
    throw NumericError("gradient check: non-finite loss");
  tape.backward(loss, Tensor::scalar(1.0));

  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad());

  auto eval = [&]() {
    Tape t;
    VarPtr l = loss_fn(t);
    if (!std::isfinite(l->value[0]))
      throw NumericError("gradient check: non-finite loss under perturbation");
    return l->value[0];
  };

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = params[pi]->value();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double saved = value[j];
      value[j] = saved + epsilon;
      const double up = eval();
      value[j] = saved - epsilon;
      const double down = eval();
      value[j] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[pi][j];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace stagecast
