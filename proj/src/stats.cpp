#include "lmrt/stats.hpp"

#include <algorithm>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "lmrt/errors.hpp"

namespace lmrt {

double ks_one_sample(std::span<const double> sample,
                     const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_one_sample: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const auto di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / m - f, f - di / m});
  }
  return d;
}

double dkw_epsilon(std::size_t m, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

ChiSquareResult chi_square(const std::map<std::uint64_t, std::uint64_t>& hist,
                           const std::map<std::uint64_t, double>& pmf) {
  double total = 0.0;
  for (const auto& [k, c] : hist) total += static_cast<double>(c);
  if (total <= 0.0) throw InvalidArgument("chi_square: empty histogram");

  // Cells with expected count < 5, unlisted keys and the missing pmf mass
  // form one pooled cell; if that is still below 5 it joins the smallest
  // regular cell.
  struct Cell {
    double obs, exp;
  };
  std::vector<Cell> regular;
  double listed = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
  for (const auto& [k, p] : pmf) {
    listed += p;
    const auto it = hist.find(k);
    const double obs = it == hist.end() ? 0.0 : static_cast<double>(it->second);
    const double exp = p * total;
    if (exp >= 5.0) {
      regular.push_back({obs, exp});
    } else {
      pooled_obs += obs;
      pooled_exp += exp;
    }
  }
  for (const auto& [k, c] : hist)
    if (!pmf.count(k)) pooled_obs += static_cast<double>(c);
  pooled_exp += std::max(0.0, 1.0 - listed) * total;
  if (pooled_exp >= 5.0) {
    regular.push_back({pooled_obs, pooled_exp});
  } else if (pooled_obs > 0.0 || pooled_exp > 0.0) {
    if (pooled_exp <= 0.0) return {std::numeric_limits<double>::infinity(), regular.size(), 0.0};
    if (regular.empty()) {
      regular.push_back({pooled_obs, pooled_exp});
    } else {
      auto smallest = std::min_element(regular.begin(), regular.end(),
                                       [](const Cell& a, const Cell& b) { return a.exp < b.exp; });
      smallest->obs += pooled_obs;
      smallest->exp += pooled_exp;
    }
  }
  double stat = 0.0;
  for (const auto& c : regular) stat += (c.obs - c.exp) * (c.obs - c.exp) / c.exp;
  const std::size_t cells = regular.size();
  if (cells < 2) return {stat, 0, 1.0};
  const std::size_t dof = cells - 1;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

DominanceResult cdf_dominance(std::span<const std::int64_t> sample,
                              const std::function<double(std::int64_t)>& reference,
                              double slack) {
  if (sample.empty()) throw InvalidArgument("cdf_dominance: empty sample");
  if (!(slack >= 0.0)) throw InvalidArgument("cdf_dominance: slack must be >= 0");
  std::vector<std::int64_t> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  DominanceResult out{true, std::nullopt, -1.0};
  std::size_t below = 0;
  // Below the sample minimum the empirical CDF is 0; start at 0 or just
  // below the minimum so those points are checked too.
  for (std::int64_t x = std::min<std::int64_t>(0, sorted.front() - 1); x <= sorted.back(); ++x) {
    while (below < sorted.size() && sorted[below] <= x) ++below;
    const double gap = reference(x) - static_cast<double>(below) / m;
    out.worst_gap = std::max(out.worst_gap, gap);
    if (gap > slack && out.pass) {
      out.pass = false;
      out.witness = x;
    }
  }
  return out;
}

double geometric_plus_one_cdf(double p, std::int64_t x) {
  if (x < 1) return 0.0;
  return 1.0 - std::pow(1.0 - p, static_cast<double>(x - 1));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Sum in sorted order so the result does not depend on record order.
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
           static_cast<double>(sorted.size());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(sorted.size() - 1);
  }
  s.min = sorted.front();
  s.max = sorted.back();
  s.q05 = quantile_sorted(sorted, 0.05);
  s.q50 = quantile_sorted(sorted, 0.50);
  s.q95 = quantile_sorted(sorted, 0.95);
  return s;
}

}  // namespace lmrt
