#include "stagecast/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace stagecast {

namespace {

constexpr std::size_t kExactLimit = 25;

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Midranks of |d|, zeros included (Pratt).
std::vector<double> midranks(const std::vector<double>& abs_d) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return abs_d[i] < abs_d[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

// Exact two-sided p over all sign assignments of the nonzero differences,
// computed by counting the W+ distribution (ranks doubled to integers).
double exact_p(const std::vector<double>& nonzero_ranks, double w_plus) {
  std::vector<long> doubled;
  long total = 0;
  for (double r : nonzero_ranks) {
    const long d = std::lround(2.0 * r);
    doubled.push_back(d);
    total += d;
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reached = 0;
  for (long d : doubled) {
    for (long s = reached; s >= 0; --s)
      if (count[static_cast<std::size_t>(s)] > 0.0)
        count[static_cast<std::size_t>(s + d)] += count[static_cast<std::size_t>(s)];
    reached += d;
  }
  const double assignments = std::pow(2.0, static_cast<double>(doubled.size()));
  const long w2 = std::lround(2.0 * w_plus);
  double below = 0.0, above = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= w2) below += count[static_cast<std::size_t>(s)];
    if (s >= w2) above += count[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, 2.0 * std::min(below, above) / assignments);
}

double approximate_p(const std::vector<double>& abs_d, double w_plus,
                     std::size_t n_zero) {
  const double n = static_cast<double>(abs_d.size());
  const double z0 = static_cast<double>(n_zero);
  const double mean = (n * (n + 1.0) - z0 * (z0 + 1.0)) / 4.0;
  double var = (n * (n + 1.0) * (2.0 * n + 1.0) - z0 * (z0 + 1.0) * (2.0 * z0 + 1.0)) /
               24.0;
  // Tie correction over groups of equal nonzero |d|.
  std::vector<double> sorted;
  for (std::size_t i = 0; i < abs_d.size(); ++i)
    if (abs_d[i] != 0.0) sorted.push_back(abs_d[i]);
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  if (var <= 0.0) return 1.0;
  double num = w_plus - mean;
  // Continuity correction toward the mean.
  if (num > 0.5)
    num -= 0.5;
  else if (num < -0.5)
    num += 0.5;
  else
    num = 0.0;
  const double z = num / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b, WilcoxonMode mode) {
  if (a.size() != b.size())
    throw ArgumentError("wilcoxon: series lengths differ (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                        ")");
  if (a.size() == 0) throw ArgumentError("wilcoxon: empty series");

  const std::size_t n = static_cast<std::size_t>(a.size());
  std::vector<double> d(n), abs_d(n);
  std::size_t n_zero = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[static_cast<Eigen::Index>(i)] - b[static_cast<Eigen::Index>(i)];
    abs_d[i] = std::abs(d[i]);
    if (d[i] == 0.0) ++n_zero;
  }

  WilcoxonResult res;
  res.n_nonzero = n - n_zero;
  if (res.n_nonzero == 0) {
    res.degenerate = true;
    res.p_value = 1.0;
    return res;
  }

  const std::vector<double> ranks = midranks(abs_d);
  std::vector<double> nonzero_ranks;
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == 0.0) continue;
    nonzero_ranks.push_back(ranks[i]);
    if (d[i] > 0.0) w_plus += ranks[i];
  }
  res.statistic = w_plus;

  const bool use_exact = mode == WilcoxonMode::Exact ||
                         (mode == WilcoxonMode::Auto && res.n_nonzero <= kExactLimit);
  res.exact = use_exact;
  res.p_value = use_exact ? exact_p(nonzero_ranks, w_plus)
                          : approximate_p(abs_d, w_plus, n_zero);
  return res;
}

}  // namespace stagecast
