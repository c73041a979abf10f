#pragma once

#include <functional>
#include <vector>

#include "stagecast/tape.hpp"

namespace stagecast {

/// Compares tape gradients of a scalar loss against central finite
/// differences, element by element, over the given parameters. Returns the
/// maximum of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12),
/// or 0 when there are no learnable elements.
///
/// loss_fn must run a fresh forward pass on the supplied tape and return the
/// recorded scalar loss; it is invoked repeatedly with perturbed parameters.
double max_relative_gradient_error(const std::vector<Parameter*>& params,
                                   const std::function<VarPtr(Tape&)>& loss_fn,
                                   double epsilon);

}  // namespace stagecast
