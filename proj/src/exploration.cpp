#include "lmrt/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "lmrt/analysis.hpp"
#include "lmrt/errors.hpp"
#include "lmrt/limits.hpp"
#include "lmrt/parallel.hpp"
#include "lmrt/rng.hpp"

namespace lmrt {

ExplorationTrace explore_ancestral_lines(const Tree& tree, std::size_t k,
                                         std::optional<std::vector<Label>> starts) {
  const Label n = tree.size();
  if (k < 2) throw InvalidArgument("explore: k must be >= 2");
  if (n < k) throw InvalidArgument("explore: tree has fewer than k vertices");

  ExplorationTrace trace;
  trace.k = k;
  if (starts) {
    if (starts->size() != k)
      throw InvalidArgument("explore: need exactly k start labels");
    trace.starts = *starts;
  } else {
    for (std::size_t i = 0; i < k; ++i) trace.starts.push_back(n - i);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Label s = trace.starts[i];
    if (s < 1 || s > n) throw InvalidArgument("explore: start label out of range");
    if (i > 0 && s >= trace.starts[i - 1])
      throw InvalidArgument("explore: starts must be strictly decreasing");
  }
  if (const auto& sched = tree.schedule(); sched && is_windowed(*sched) && n >= 2)
    trace.starts_in_window = trace.starts.back() >= window_lo(*sched, n - 1);

  std::vector<Label> frontier = trace.starts;
  std::vector<std::uint64_t> counts(k, 0);
  for (std::uint64_t m = 0;; ++m) {
    // Step (1): coincidence check precedes any reveal.
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (frontier[a] == frontier[b]) {
          trace.termination = m;
          trace.terminal_label = frontier[a];
          trace.terminal_depth = depth_of(tree, frontier[a]);
          trace.coalesced_pair = {a, b};
          return trace;
        }
    // Step (2): labels are distinct, so the argmax is unique and > 1.
    const auto line = static_cast<std::size_t>(
        std::max_element(frontier.begin(), frontier.end()) - frontier.begin());
    frontier[line] = tree.parent(frontier[line]);
    ++counts[line];
    trace.steps.push_back({m + 1, frontier[line], line, counts});
  }
}

void write_trace_csv(const ExplorationTrace& trace, std::ostream& out) {
  out << "m,revealed_label,chosen_line";
  for (std::size_t i = 1; i <= trace.k; ++i) out << ",M_" << i;
  out << '\n';
  for (const auto& s : trace.steps) {
    out << s.m << ',' << s.revealed << ',' << s.line + 1;
    for (auto c : s.counts) out << ',' << c;
    out << '\n';
  }
}

std::vector<Label> simulate_chain(Label n, double beta, std::uint64_t seed,
                                  ChainStop stop, ChainConvention convention) {
  if (n < 1) throw InvalidArgument("simulate_chain: n must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
  Rng rng(seed);
  std::vector<Label> chain{n};
  Label l = n;
  if (convention == ChainConvention::kModelConsistent) {
    const MemorySchedule meso = Mesoscopic{beta};
    while (l > 1 && l > stop.threshold) {
      const Window w = window(meso, l - 1);
      l = rng.between(w.lo, w.hi);
      chain.push_back(l);
    }
  } else {
    while (l > 0 && l > stop.threshold) {
      l -= rng.between(1, floor_pow(l, beta));
      chain.push_back(l);
    }
  }
  return chain;
}

double chain_fluid_deviation(const std::vector<Label>& chain, Label n,
                             double beta, double t_max) {
  const double scale = std::pow(static_cast<double>(n), 1.0 - beta);
  const auto last = static_cast<std::uint64_t>(std::floor(t_max * scale));
  double worst = 0.0;
  for (std::uint64_t idx = 0; idx <= last; ++idx) {
    const double value =
        idx < chain.size() ? static_cast<double>(chain[idx]) / static_cast<double>(n) : 0.0;
    const double t_lo = static_cast<double>(idx) / scale;
    const double t_hi = std::min(t_max, static_cast<double>(idx + 1) / scale);
    worst = std::max({worst, std::abs(value - f_beta(beta, t_lo)),
                      std::abs(value - f_beta(beta, t_hi))});
  }
  return worst;
}

std::vector<BranchpointRecord> branchpoint_statistics(
    double beta, Label n, std::size_t k, std::uint64_t replications,
    std::uint64_t master_seed, unsigned threads) {
  if (k < 2) throw InvalidArgument("branchpoint_statistics: k must be >= 2");
  const MemorySchedule schedule = Mesoscopic{beta};
  validate(schedule);
  const double line_scale = std::pow(static_cast<double>(n), 1.0 - beta);
  const double height_scale = height_constant_meso(beta) * line_scale;
  std::vector<BranchpointRecord> out(replications);
  parallel_for(replications, threads, [&](std::uint64_t r) {
    const std::uint64_t seed = derive_seed(master_seed, r);
    const Tree tree = grow_tree(schedule, n, seed);
    const auto trace = explore_ancestral_lines(tree, k);
    double imbalance = 0.0;
    for (const auto& step : trace.steps)
      for (auto c : step.counts)
        imbalance = std::max(
            imbalance, std::abs(static_cast<double>(c) -
                                static_cast<double>(step.m) / static_cast<double>(k)));
    out[r] = {r,
              seed,
              trace.terminal_depth,
              static_cast<double>(trace.terminal_depth) / height_scale,
              trace.termination,
              imbalance / line_scale};
  });
  return out;
}

void write_branchpoint_csv(const std::vector<BranchpointRecord>& records,
                           std::ostream& out) {
  char buf[64];
  out << "replication,seed,depth,scaled_depth\n";
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.scaled_depth);
    out << r.replication << ',' << r.seed << ',' << r.depth << ',' << buf << '\n';
  }
}

}  // namespace lmrt
