#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "lmrt/fringe.hpp"
#include "lmrt/tree.hpp"

namespace lmrt {

/// CSR child lists; children of v are listed in increasing label order.
class ChildIndex {
 public:
  explicit ChildIndex(const Tree& tree);

  std::span<const Label> children(Label v) const {
    return {kids_.data() + offsets_[v], kids_.data() + offsets_[v + 1]};
  }
  std::uint64_t child_count(Label v) const {
    return offsets_[v + 1] - offsets_[v];
  }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<Label> kids_;
};

/// Depth of every vertex (index v = 1..n; entry 0 unused), one pass.
std::vector<std::uint32_t> depths(const Tree& tree);

/// Walks up from v. Throws InvalidArgument for labels outside 1..n.
std::uint64_t depth_of(const Tree& tree, Label v);
std::uint64_t height(const Tree& tree);

/// (v, parent(v), ..., 1).
std::vector<Label> ancestor_chain(const Tree& tree, Label v);

/// degree(v) = #children + [v != 1].
std::map<std::uint64_t, std::uint64_t> degree_histogram(const Tree& tree);

/// Descendant subtree of v in canonical form; nullopt if larger than cap.
FringeResult fringe_at(const Tree& tree, const ChildIndex& index, Label v,
                       std::size_t size_cap);
FringeResult fringe_at(const Tree& tree, Label v, std::size_t size_cap);

/// Fringes of all n vertices, computed bottom-up in one pass.
FringeDistribution empirical_fringe(const Tree& tree, std::size_t size_cap);

/// (f_0, ..., f_k): f_0 is the fringe at v; f_i is rooted at the i-th
/// ancestor v_i and keeps every descendant whose root path avoids v_{i-1}.
/// Throws TooShallow when depth_of(v) < k.
std::vector<FringeResult> extended_fringe(const Tree& tree,
                                          const ChildIndex& index, Label v,
                                          std::size_t k, std::size_t size_cap);
std::vector<FringeResult> extended_fringe(const Tree& tree, Label v,
                                          std::size_t k, std::size_t size_cap);

struct Branchpoint {
  Label label;
  std::uint64_t depth;
  friend bool operator==(const Branchpoint&, const Branchpoint&) = default;
};

/// Subtree spanned by the root path of each leaf.
///
/// Branchpoints are the distinct most-recent common ancestors over leaf
/// pairs (a leaf that is an ancestor of another leaf counts). They are
/// ordered by decreasing label, the order in which an ancestral exploration
/// meets them; along any root path this is also decreasing depth.
struct SpannedSubtree {
  std::vector<Label> leaves;
  std::vector<Branchpoint> branchpoints;
  std::vector<std::uint64_t> leaf_depths;
  std::vector<std::uint64_t> distances;  // row-major k x k

  std::uint64_t distance(std::size_t i, std::size_t j) const {
    return distances[i * leaves.size() + j];
  }
};

/// Throws InvalidArgument for repeated or out-of-range leaves.
SpannedSubtree spanned_subtree(const Tree& tree, std::span<const Label> leaves);

/// Four-point condition on a k x k distance matrix.
bool is_tree_metric(std::span<const std::uint64_t> distances, std::size_t k);

void write_spanned_json(const SpannedSubtree& sub, std::ostream& out);

/// Graph distance from each vertex to the root-to-n path (index v = 1..n).
std::vector<std::uint32_t> spine_distances(const Tree& tree);
std::uint64_t max_dist_to_spine(const Tree& tree);

}  // namespace lmrt
