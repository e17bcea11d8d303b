#include "lmrt/analysis.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "lmrt/errors.hpp"

namespace lmrt {
namespace {

void check_label(const Tree& tree, Label v) {
  if (v < 1 || v > tree.size()) {
    std::ostringstream os;
    os << "label " << v << " outside 1.." << tree.size();
    throw InvalidArgument(os.str());
  }
}

/// Collects `root` and its descendants (skipping the child `excluded`) into
/// a local parent array in BFS order. Returns false once more than `cap`
/// vertices are found.
bool collect_local(const ChildIndex& index, Label root, Label excluded,
                   std::size_t cap, std::vector<std::size_t>& local_parent) {
  std::vector<Label> queue{root};
  local_parent.assign(1, 0);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (Label c : index.children(queue[head])) {
      if (head == 0 && c == excluded) continue;
      if (queue.size() >= cap) return false;
      queue.push_back(c);
      local_parent.push_back(head);
    }
  }
  return true;
}

FringeResult local_fringe(const ChildIndex& index, Label root, Label excluded,
                          std::size_t cap) {
  std::vector<std::size_t> local_parent;
  if (cap == 0 || !collect_local(index, root, excluded, cap, local_parent))
    return std::nullopt;
  return FringeTree{canonical_code(local_parent), local_parent.size()};
}

}  // namespace

ChildIndex::ChildIndex(const Tree& tree)
    : offsets_(tree.size() + 2, 0), kids_(tree.size() > 0 ? tree.size() - 1 : 0) {
  const Label n = tree.size();
  for (Label v = 2; v <= n; ++v) ++offsets_[tree.parent(v) + 1];
  for (Label v = 1; v <= n + 1; ++v) offsets_[v] += offsets_[v - 1];
  std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (Label v = 2; v <= n; ++v) kids_[cursor[tree.parent(v)]++] = v;
}

std::vector<std::uint32_t> depths(const Tree& tree) {
  std::vector<std::uint32_t> d(tree.size() + 1, 0);
  for (Label v = 2; v <= tree.size(); ++v) d[v] = d[tree.parent(v)] + 1;
  return d;
}

std::uint64_t depth_of(const Tree& tree, Label v) {
  check_label(tree, v);
  std::uint64_t d = 0;
  for (; v > 1; v = tree.parent(v)) ++d;
  return d;
}

std::uint64_t height(const Tree& tree) {
  const auto d = depths(tree);
  return *std::max_element(d.begin() + 1, d.end());
}

std::vector<Label> ancestor_chain(const Tree& tree, Label v) {
  check_label(tree, v);
  std::vector<Label> chain{v};
  while (v > 1) {
    v = tree.parent(v);
    chain.push_back(v);
  }
  return chain;
}

std::map<std::uint64_t, std::uint64_t> degree_histogram(const Tree& tree) {
  const Label n = tree.size();
  std::vector<std::uint32_t> children(n + 1, 0);
  for (Label v = 2; v <= n; ++v) ++children[tree.parent(v)];
  std::map<std::uint64_t, std::uint64_t> hist;
  for (Label v = 1; v <= n; ++v) ++hist[children[v] + (v > 1 ? 1 : 0)];
  return hist;
}

FringeResult fringe_at(const Tree& tree, const ChildIndex& index, Label v,
                       std::size_t size_cap) {
  check_label(tree, v);
  return local_fringe(index, v, 0, size_cap);
}

FringeResult fringe_at(const Tree& tree, Label v, std::size_t size_cap) {
  return fringe_at(tree, ChildIndex(tree), v, size_cap);
}

FringeDistribution empirical_fringe(const Tree& tree, std::size_t size_cap) {
  const Label n = tree.size();
  const ChildIndex index(tree);
  constexpr std::int32_t kCut = -1;
  std::vector<std::int32_t> id(n + 1, kCut);
  std::vector<std::uint32_t> size(n + 1, 0);
  std::vector<std::string> codes;
  std::unordered_map<std::string, std::int32_t> interned;
  std::vector<std::uint64_t> counts;
  std::uint64_t truncated = 0;

  std::vector<const std::string*> parts;
  std::string buf;
  // Children carry larger labels, so a descending scan is bottom-up.
  for (Label v = n; v >= 1; --v) {
    bool cut = false;
    std::uint64_t sz = 1;
    parts.clear();
    for (Label c : index.children(v)) {
      if (id[c] == kCut) {
        cut = true;
        break;
      }
      sz += size[c];
      parts.push_back(&codes[static_cast<std::size_t>(id[c])]);
    }
    if (cut || sz > size_cap) {
      ++truncated;
      continue;
    }
    std::sort(parts.begin(), parts.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    buf.assign(1, '(');
    for (const auto* p : parts) buf += *p;
    buf.push_back(')');
    auto [it, inserted] =
        interned.try_emplace(buf, static_cast<std::int32_t>(codes.size()));
    if (inserted) {
      codes.push_back(buf);
      counts.push_back(0);
    }
    id[v] = it->second;
    size[v] = static_cast<std::uint32_t>(sz);
    ++counts[static_cast<std::size_t>(it->second)];
  }

  FringeDistribution dist;
  dist.total = n;
  dist.truncated = truncated;
  for (std::size_t i = 0; i < codes.size(); ++i) dist.counts[codes[i]] = counts[i];
  return dist;
}

std::vector<FringeResult> extended_fringe(const Tree& tree,
                                          const ChildIndex& index, Label v,
                                          std::size_t k, std::size_t size_cap) {
  check_label(tree, v);
  std::vector<Label> path{v};
  for (std::size_t i = 0; i < k; ++i) {
    if (path.back() == 1) {
      std::ostringstream os;
      os << "vertex " << v << " has depth " << i << " < " << k;
      throw TooShallow(os.str());
    }
    path.push_back(tree.parent(path.back()));
  }
  std::vector<FringeResult> out;
  out.reserve(k + 1);
  out.push_back(local_fringe(index, v, 0, size_cap));
  for (std::size_t i = 1; i <= k; ++i)
    out.push_back(local_fringe(index, path[i], path[i - 1], size_cap));
  return out;
}

std::vector<FringeResult> extended_fringe(const Tree& tree, Label v,
                                          std::size_t k, std::size_t size_cap) {
  return extended_fringe(tree, ChildIndex(tree), v, k, size_cap);
}

SpannedSubtree spanned_subtree(const Tree& tree, std::span<const Label> leaves) {
  const std::size_t k = leaves.size();
  std::vector<std::vector<Label>> chains;
  chains.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (leaves[i] == leaves[j])
        throw InvalidArgument("spanned_subtree: leaves must be distinct");
    chains.push_back(ancestor_chain(tree, leaves[i]));
  }

  SpannedSubtree out;
  out.leaves.assign(leaves.begin(), leaves.end());
  out.distances.assign(k * k, 0);
  for (const auto& c : chains) out.leaf_depths.push_back(c.size() - 1);

  std::set<Label, std::greater<>> seen;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      // Chains are strictly decreasing and end at 1: the first common entry
      // of a merge walk is the maximum common label, i.e. the MRCA.
      const auto& ca = chains[a];
      const auto& cb = chains[b];
      std::size_t i = 0, j = 0;
      while (ca[i] != cb[j]) {
        if (ca[i] > cb[j])
          ++i;
        else
          ++j;
      }
      out.distances[a * k + b] = out.distances[b * k + a] = i + j;
      if (seen.insert(ca[i]).second)
        out.branchpoints.push_back({ca[i], ca.size() - 1 - i});
    }
  }
  std::sort(out.branchpoints.begin(), out.branchpoints.end(),
            [](const Branchpoint& x, const Branchpoint& y) {
              return x.label > y.label;
            });
  return out;
}

bool is_tree_metric(std::span<const std::uint64_t> d, std::size_t k) {
  auto at = [&](std::size_t i, std::size_t j) { return d[i * k + j]; };
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < k; ++y)
      for (std::size_t z = 0; z < k; ++z)
        for (std::size_t w = 0; w < k; ++w) {
          const auto lhs = at(x, y) + at(z, w);
          const auto rhs = std::max(at(x, z) + at(y, w), at(x, w) + at(y, z));
          if (lhs > rhs) return false;
        }
  return true;
}

void write_spanned_json(const SpannedSubtree& sub, std::ostream& out) {
  nlohmann::json j;
  j["leaves"] = sub.leaves;
  j["leaf_depths"] = sub.leaf_depths;
  auto& bps = j["branchpoints"] = nlohmann::json::array();
  for (const auto& bp : sub.branchpoints)
    bps.push_back({{"label", bp.label}, {"depth", bp.depth}});
  j["distances"] = sub.distances;
  out << j.dump(2) << '\n';
}

std::vector<std::uint32_t> spine_distances(const Tree& tree) {
  const Label n = tree.size();
  std::vector<char> on_spine(n + 1, 0);
  for (Label v = n; v >= 1; v = tree.parent(v)) {
    on_spine[v] = 1;
    if (v == 1) break;
  }
  std::vector<std::uint32_t> dist(n + 1, 0);
  for (Label v = 2; v <= n; ++v)
    dist[v] = on_spine[v] ? 0 : dist[tree.parent(v)] + 1;
  return dist;
}

std::uint64_t max_dist_to_spine(const Tree& tree) {
  const auto d = spine_distances(tree);
  return *std::max_element(d.begin() + 1, d.end());
}

}  // namespace lmrt
