#include "lmrt/tree.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "lmrt/errors.hpp"
#include "lmrt/rng.hpp"

namespace lmrt {

class TreeBuilder {
 public:
  TreeBuilder(Label n, std::optional<MemorySchedule> schedule,
              std::uint64_t seed) {
    tree_.n_ = n;
    tree_.narrow_ = n < (Label{1} << 31);
    if (tree_.narrow_)
      tree_.parent32_.assign(n + 1, 0);
    else
      tree_.parent64_.assign(n + 1, 0);
    tree_.schedule_ = std::move(schedule);
    tree_.seed_ = seed;
  }

  void set(Label v, Label p) {
    if (tree_.narrow_)
      tree_.parent32_[v] = static_cast<std::uint32_t>(p);
    else
      tree_.parent64_[v] = p;
  }

  Tree finish() { return std::move(tree_); }

 private:
  Tree tree_;
};

namespace {

/// Calls sink(v, parent) for v = 2..n in order. The only consumer of the
/// random stream, so every growth path sees identical draws.
template <typename Sink>
void grow_core(const MemorySchedule& schedule, Label n, std::uint64_t seed,
               Sink&& sink) {
  validate(schedule, 0);
  Rng rng(seed);
  if (const auto* sarrt = std::get_if<Sarrt>(&schedule)) {
    for (Label m = 1; m < n; ++m) {
      const double v = sarrt->quantile(rng.uniform());
      auto p = static_cast<Label>(
          std::floor(static_cast<long double>(m) * static_cast<long double>(v)));
      if (p < 1) p = 1;
      if (p > m) p = m;
      sink(m + 1, p);
    }
    return;
  }
  WindowCursor cursor(schedule);
  for (Label m = 1; m < n; ++m) {
    const Window w = cursor.next(m);
    sink(m + 1, rng.between(w.lo, w.hi));
  }
}

void require_n(Label n) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
}

}  // namespace

Tree Tree::from_parents(std::span<const Label> parents,
                        std::optional<MemorySchedule> schedule,
                        std::uint64_t seed) {
  if (parents.size() < 2)
    throw InvalidArgument("parent array must cover at least vertex 1");
  const Label n = parents.size() - 1;
  TreeBuilder builder(n, std::move(schedule), seed);
  for (Label v = 2; v <= n; ++v) {
    const Label p = parents[v];
    if (p < 1 || p >= v) {
      std::ostringstream os;
      os << "invalid parent " << p << " for vertex " << v;
      throw InvalidArgument(os.str());
    }
    builder.set(v, p);
  }
  return builder.finish();
}

std::vector<Label> Tree::parents() const {
  std::vector<Label> out(n_ + 1, 0);
  for (Label v = 2; v <= n_; ++v) out[v] = parent(v);
  return out;
}

Tree grow_tree(const MemorySchedule& schedule, Label n, std::uint64_t seed) {
  require_n(n);
  TreeBuilder builder(n, schedule, seed);
  grow_core(schedule, n, seed, [&](Label v, Label p) { builder.set(v, p); });
  return builder.finish();
}

GrowthSummary grow_streaming(const MemorySchedule& schedule, Label n,
                             std::uint64_t seed, CollectFlags collect) {
  require_n(n);
  if (n > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("grow_streaming supports n < 2^32");
  std::vector<std::uint32_t> depth(n + 1, 0);
  std::vector<std::uint32_t> children(n + 1, 0);
  std::vector<Label> parents;
  if (collect.parents) parents.assign(n + 1, 0);
  std::uint32_t height = 0;

  grow_core(schedule, n, seed, [&](Label v, Label p) {
    const std::uint32_t d = depth[p] + 1;
    depth[v] = d;
    if (d > height) height = d;
    ++children[p];
    if (collect.parents) parents[v] = p;
  });

  GrowthSummary out;
  out.n = n;
  out.height = height;
  out.seed = seed;
  // Dense counts first; degrees are small so this stays cache-resident.
  std::vector<std::uint64_t> dense;
  for (Label v = 1; v <= n; ++v) {
    const std::uint64_t deg = children[v] + (v > 1 ? 1 : 0);
    if (deg >= dense.size()) dense.resize(deg + 1, 0);
    ++dense[deg];
  }
  for (std::size_t k = 0; k < dense.size(); ++k)
    if (dense[k] > 0) out.degree_histogram[k] = dense[k];
  if (collect.depth) out.depth = std::move(depth);
  if (collect.parents) out.parents = std::move(parents);
  return out;
}

bool window_legal(const Tree& tree, const MemorySchedule& schedule) {
  for (Label v = 2; v <= tree.size(); ++v) {
    const Window w = window(schedule, v - 1);
    const Label p = tree.parent(v);
    if (p < w.lo || p > w.hi) return false;
  }
  return true;
}

void write_parent_csv(const Tree& tree, std::ostream& out) {
  out << "vertex,parent\n";
  for (Label v = 2; v <= tree.size(); ++v)
    out << v << ',' << tree.parent(v) << '\n';
}

Tree read_parent_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "vertex,parent")
    throw InvalidArgument("expected header 'vertex,parent'");
  std::vector<Label> parents{0, 0};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidArgument("malformed row: " + line);
    const Label v = std::stoull(line.substr(0, comma));
    const Label p = std::stoull(line.substr(comma + 1));
    if (v != parents.size())
      throw InvalidArgument("rows must list vertices 2..n in order");
    parents.push_back(p);
  }
  return Tree::from_parents(parents);
}

void write_dot(const Tree& tree, std::ostream& out) {
  out << "digraph T {";
  if (tree.size() == 1) out << " 1;";
  for (Label v = 2; v <= tree.size(); ++v)
    out << ' ' << v << " -> " << tree.parent(v) << ';';
  out << " }\n";
}

}  // namespace lmrt
