#pragma once

#include <Eigen/Core>
#include <string>

#include "stagecast/errors.hpp"

namespace stagecast {

/// Paired observed/predicted series in feet. Signed errors follow the
/// overestimation-positive convention: error = predicted - observed.
struct ErrorDistribution {
  Eigen::VectorXd observed;
  Eigen::VectorXd predicted;
  std::string location;  // optional tag: S1, S25A, S25B, S26
  int lead_time = 0;     // optional tag: 1..k, 0 = pooled

  Eigen::VectorXd errors() const { return predicted - observed; }
  std::size_t size() const { return static_cast<std::size_t>(observed.size()); }
};

double mae(const ErrorDistribution& dist);
double rmse(const ErrorDistribution& dist);

/// Nash-Sutcliffe efficiency; throws NumericError when the observed series
/// is constant.
double nse(const ErrorDistribution& dist);

struct KgeResult {
  double kge = 0.0;
  double r = 0.0;      // Pearson correlation
  double alpha = 0.0;  // std(predicted) / std(observed)
  double beta = 0.0;   // mean(predicted) / mean(observed)
};

KgeResult kge(const ErrorDistribution& dist);

struct ExtremeFractions {
  double total = 0.0;  // |error| >= threshold
  double over = 0.0;   // error >= threshold
  double under = 0.0;  // error <= -threshold
};

ExtremeFractions extreme_error_fraction(const ErrorDistribution& dist,
                                        double threshold);

}  // namespace stagecast
