#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace lmrt {

/// sup_x |F_m(x) - cdf(x)|, taking both one-sided gaps at each sample point.
/// Throws InvalidArgument on an empty sample.
double ks_one_sample(std::span<const double> sample,
                     const std::function<double(double)>& cdf);

/// Dvoretzky-Kiefer-Wolfowitz radius: P(KS > eps) <= alpha for m draws.
double dkw_epsilon(std::size_t m, double alpha);

/// Total variation between a histogram and a (possibly sub-stochastic) pmf.
/// Histogram keys missing from the pmf share one bucket with the pmf's
/// missing mass 1 - sum(pmf).
template <typename Key>
double tv_distance(const std::map<Key, std::uint64_t>& hist,
                   const std::map<Key, double>& pmf) {
  double total = 0.0;
  for (const auto& [key, count] : hist) total += static_cast<double>(count);
  if (total <= 0.0) return 0.0;
  double gap = 0.0, listed = 0.0, other_emp = 0.0;
  for (const auto& [key, p] : pmf) {
    listed += p;
    const auto it = hist.find(key);
    const double emp = it == hist.end() ? 0.0 : static_cast<double>(it->second) / total;
    gap += std::abs(emp - p);
  }
  for (const auto& [key, count] : hist)
    if (!pmf.count(key)) other_emp += static_cast<double>(count) / total;
  gap += std::abs(other_emp - std::max(0.0, 1.0 - listed));
  return 0.5 * gap;
}

/// Total variation between two probability maps over the union of keys.
template <typename Key>
double tv_distance(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  double gap = 0.0;
  for (const auto& [key, p] : a) {
    const auto it = b.find(key);
    gap += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [key, p] : b)
    if (!a.count(key)) gap += std::abs(p);
  return 0.5 * gap;
}

struct ChiSquareResult {
  double statistic;
  std::size_t dof;
  double p_value;
};

/// Pearson chi-square of a histogram against a pmf. Cells with expected
/// count < 5 (and the pmf's missing mass) are pooled into one cell.
ChiSquareResult chi_square(const std::map<std::uint64_t, std::uint64_t>& hist,
                           const std::map<std::uint64_t, double>& pmf);

struct DominanceResult {
  bool pass;
  std::optional<std::int64_t> witness;  // first violating x
  double worst_gap;                      // max_x reference(x) - empirical(x)
};

/// Checks F_sample(x) >= reference(x) - slack at every integer x between
/// min(sample) and max(sample): the sample is stochastically no larger than
/// the reference, up to slack.
DominanceResult cdf_dominance(std::span<const std::int64_t> sample,
                              const std::function<double(std::int64_t)>& reference,
                              double slack);

/// CDF of G + 1 where P(G > k) = (1-p)^k, k = 0, 1, ...
double geometric_plus_one_cdf(double p, std::int64_t x);

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single value
  double min = 0.0;
  double max = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  std::size_t count = 0;
};

/// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

Summary summarize(std::span<const double> values);

}  // namespace lmrt
