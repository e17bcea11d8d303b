#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lmrt/schedule.hpp"

namespace lmrt {

/// Immutable parent-array tree on labels 1..n. parent(1) == 0 ("none").
/// Parents are stored in 32 bits when n < 2^31 and in 64 bits otherwise.
class Tree {
 public:
  /// `parents[v]` for v = 0..n, entries 0 and 1 ignored. Validates
  /// 1 <= parent(v) < v.
  static Tree from_parents(std::span<const Label> parents,
                           std::optional<MemorySchedule> schedule = {},
                           std::uint64_t seed = 0);

  Label size() const noexcept { return n_; }

  Label parent(Label v) const noexcept {
    return narrow_ ? parent32_[v] : parent64_[v];
  }

  const std::optional<MemorySchedule>& schedule() const noexcept {
    return schedule_;
  }
  std::uint64_t seed() const noexcept { return seed_; }
  bool narrow_storage() const noexcept { return narrow_; }

  /// Copy of the parent array in the from_parents() layout.
  std::vector<Label> parents() const;

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.n_ == b.n_ && a.parents() == b.parents();
  }

 private:
  friend class TreeBuilder;
  Tree() = default;

  Label n_ = 0;
  bool narrow_ = true;
  std::vector<std::uint32_t> parent32_;
  std::vector<std::uint64_t> parent64_;
  std::optional<MemorySchedule> schedule_;
  std::uint64_t seed_ = 0;
};

struct GrowthSummary {
  Label n = 0;
  std::uint64_t height = 0;
  std::map<std::uint64_t, std::uint64_t> degree_histogram;
  std::optional<std::vector<std::uint32_t>> depth;  // index v = 1..n
  std::optional<std::vector<Label>> parents;        // from_parents() layout
  std::uint64_t seed = 0;
};

struct CollectFlags {
  bool depth = false;
  bool parents = false;
};

/// Grows T_n. Vertex m+1 attaches uniformly to window(schedule, m), or to
/// max(1, floor(m V)) for Sarrt. Deterministic in (schedule, n, seed).
Tree grow_tree(const MemorySchedule& schedule, Label n, std::uint64_t seed);

/// Same random stream as grow_tree, but keeps only depth and child counts
/// (plus the parent array if requested).
GrowthSummary grow_streaming(const MemorySchedule& schedule, Label n,
                             std::uint64_t seed, CollectFlags collect = {});

/// Every parent(v) lies in window(schedule, v-1). Needs a windowed schedule.
bool window_legal(const Tree& tree, const MemorySchedule& schedule);

/// `vertex,parent` CSV, one row per v = 2..n, LF endings.
void write_parent_csv(const Tree& tree, std::ostream& out);
Tree read_parent_csv(std::istream& in);

/// `digraph T { v -> p; ... }` with child -> parent edges.
void write_dot(const Tree& tree, std::ostream& out);

}  // namespace lmrt
