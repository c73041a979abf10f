#pragma once

#include <Eigen/Core>

#include "stagecast/errors.hpp"

namespace stagecast {

enum class WilcoxonMode { Exact, Approximate, Auto };

struct WilcoxonResult {
  double statistic = 0.0;  // W+: sum of ranks of positive differences
  double p_value = 1.0;    // two-sided
  std::size_t n_nonzero = 0;
  bool degenerate = false;  // all differences zero
  bool exact = false;       // mode actually used
};

/// Two-sided paired signed-rank test on a_i - b_i. Zeros are handled by the
/// Pratt method: ranked with everything else, then dropped from the
/// statistic. Exact p by sign enumeration when the nonzero count is <= 25
/// (or mode Exact); otherwise a normal approximation with zero, tie, and
/// continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b,
                                    WilcoxonMode mode = WilcoxonMode::Auto);

}  // namespace stagecast
