#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lmrt/tree.hpp"

namespace lmrt {

struct ExplorationStep {
  std::uint64_t m;                    // step index, 1-based
  Label revealed;                     // L(m)
  std::size_t line;                   // 0-based index of the advanced line
  std::vector<std::uint64_t> counts;  // M^1_m .. M^k_m
};

struct ExplorationTrace {
  std::size_t k = 0;
  std::vector<Label> starts;  // n_1 > ... > n_k
  std::vector<ExplorationStep> steps;
  std::uint64_t termination = 0;  // T
  Label terminal_label = 0;       // shared label at step T
  std::uint64_t terminal_depth = 0;
  std::pair<std::size_t, std::size_t> coalesced_pair{0, 0};  // 0-based
  /// n_k >= j(n-1) under the tree's schedule (false when unknown).
  bool starts_in_window = false;
};

/// Explores the ancestral lines of `starts` (default n, n-1, ..., n-k+1) by
/// repeatedly revealing the parent of the frontier vertex with the largest
/// label, stopping as soon as two frontier labels coincide.
///
/// Throws InvalidArgument for k < 2, n < k, or starts that are not strictly
/// decreasing valid labels.
ExplorationTrace explore_ancestral_lines(
    const Tree& tree, std::size_t k,
    std::optional<std::vector<Label>> starts = {});

/// `m,revealed_label,chosen_line,M_1,...,M_k` (chosen_line 1-based).
void write_trace_csv(const ExplorationTrace& trace, std::ostream& out);

enum class ChainConvention {
  /// Parent law of the grown tree: uniform on window(mesoscopic, l-1).
  kModelConsistent,
  /// l -> l - Uniform{1..floor(l^beta)}, absorbed at 0.
  kPaperLiteral,
};

struct ChainStop {
  /// Stop once the label drops to or below this value (0 = absorption).
  Label threshold = 0;
};

/// Ancestor labels (n, L(1), L(2), ...) of vertex n without building a tree.
/// Model-consistent chains end at 1; paper-literal chains end at 0.
std::vector<Label> simulate_chain(Label n, double beta, std::uint64_t seed,
                                  ChainStop stop = {},
                                  ChainConvention convention =
                                      ChainConvention::kModelConsistent);

/// sup over t in [0, t_max] of |L(floor(t n^{1-beta})) / n - f_beta(t)|,
/// with L(k) = 0 past the end of the chain. Evaluated at every chain index
/// and at both sides of each jump of the step function.
double chain_fluid_deviation(const std::vector<Label>& chain, Label n,
                             double beta, double t_max);

struct BranchpointRecord {
  std::uint64_t replication;
  std::uint64_t seed;
  std::uint64_t depth;
  double scaled_depth;
  std::uint64_t termination;
  double max_line_imbalance;  // max_m max_i |M^i_m - m/k| / n^{1-beta}
};

/// Per replication: grow a mesoscopic tree with seed derive_seed(master, r),
/// explore the k youngest lines and record the root distance of the terminal
/// branchpoint, scaled by (2/(1-beta)) n^{1-beta} (= 4 sqrt(n) at beta 1/2).
std::vector<BranchpointRecord> branchpoint_statistics(
    double beta, Label n, std::size_t k, std::uint64_t replications,
    std::uint64_t master_seed, unsigned threads = 1);

/// `replication,seed,depth,scaled_depth`.
void write_branchpoint_csv(const std::vector<BranchpointRecord>& records,
                           std::ostream& out);

}  // namespace lmrt
