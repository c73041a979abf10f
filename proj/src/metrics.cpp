#include "stagecast/metrics.hpp"

#include <cmath>

namespace stagecast {

namespace {

void check_nonempty(const ErrorDistribution& dist, const char* what) {
  if (dist.observed.size() == 0)
    throw ArgumentError(std::string(what) + " of an empty distribution");
  if (dist.observed.size() != dist.predicted.size())
    throw ArgumentError(std::string(what) + ": observed and predicted lengths differ (" +
                        std::to_string(dist.observed.size()) + " vs " +
                        std::to_string(dist.predicted.size()) + ")");
}

double population_std(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().mean());
}

}  // namespace

double mae(const ErrorDistribution& dist) {
  check_nonempty(dist, "mae");
  return dist.errors().array().abs().mean();
}

double rmse(const ErrorDistribution& dist) {
  check_nonempty(dist, "rmse");
  return std::sqrt(dist.errors().array().square().mean());
}

double nse(const ErrorDistribution& dist) {
  check_nonempty(dist, "nse");
  const double mean = dist.observed.mean();
  const double denom = (dist.observed.array() - mean).square().sum();
  if (denom == 0.0)
    throw NumericError("nse undefined: observed series is constant");
  const double num = (dist.observed - dist.predicted).squaredNorm();
  return 1.0 - num / denom;
}

KgeResult kge(const ErrorDistribution& dist) {
  check_nonempty(dist, "kge");
  const double obs_mean = dist.observed.mean();
  const double pred_mean = dist.predicted.mean();
  if (obs_mean == 0.0)
    throw NumericError("kge undefined: observed mean is zero (beta component)");
  const double obs_std = population_std(dist.observed);
  const double pred_std = population_std(dist.predicted);
  if (obs_std == 0.0 || pred_std == 0.0)
    throw NumericError("kge undefined: zero variance (r component)");

  KgeResult out;
  const double cov = ((dist.observed.array() - obs_mean) *
                      (dist.predicted.array() - pred_mean))
                         .mean();
  out.r = cov / (obs_std * pred_std);
  out.alpha = pred_std / obs_std;
  out.beta = pred_mean / obs_mean;
  out.kge = 1.0 - std::sqrt((out.r - 1.0) * (out.r - 1.0) +
                            (out.alpha - 1.0) * (out.alpha - 1.0) +
                            (out.beta - 1.0) * (out.beta - 1.0));
  return out;
}

ExtremeFractions extreme_error_fraction(const ErrorDistribution& dist,
                                        double threshold) {
  check_nonempty(dist, "extreme_error_fraction");
  if (!(threshold > 0.0)) throw ArgumentError("extreme-error threshold must be positive");
  const Eigen::VectorXd e = dist.errors();
  const double n = static_cast<double>(e.size());
  std::size_t over = 0, under = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e[i] >= threshold) ++over;
    if (e[i] <= -threshold) ++under;
  }
  ExtremeFractions f;
  f.over = static_cast<double>(over) / n;
  f.under = static_cast<double>(under) / n;
  f.total = static_cast<double>(over + under) / n;
  return f;
}

}  // namespace stagecast
