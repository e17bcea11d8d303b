#include "doctest.h"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "lmrt/analysis.hpp"
#include "lmrt/errors.hpp"
#include "lmrt/exploration.hpp"
#include "lmrt/limits.hpp"
#include "lmrt/rng.hpp"

using namespace lmrt;

namespace {

Tree path_tree(Label n) {
  std::vector<Label> p(n + 1, 0);
  for (Label v = 2; v <= n; ++v) p[v] = v - 1;
  return Tree::from_parents(p);
}

void check_trace_invariants(const ExplorationTrace& tr) {
  // Replay the frontier: each step advances the line holding the largest
  // label, and that label strictly decreases from step to step. The revealed
  // parents themselves need not be monotone.
  std::vector<Label> frontier = tr.starts;
  Label prev = UINT64_MAX;
  for (const auto& s : tr.steps) {
    const auto total = std::accumulate(s.counts.begin(), s.counts.end(), std::uint64_t{0});
    REQUIRE(total == s.m);
    REQUIRE(std::set<Label>(frontier.begin(), frontier.end()).size() == frontier.size());
    const Label expanded = frontier[s.line];
    REQUIRE(expanded == *std::max_element(frontier.begin(), frontier.end()));
    REQUIRE(expanded < prev);
    REQUIRE(s.revealed < expanded);
    prev = expanded;
    frontier[s.line] = s.revealed;
  }
  REQUIRE(tr.steps.size() == tr.termination);
  REQUIRE(std::count(frontier.begin(), frontier.end(), tr.terminal_label) >= 2);
}

}  // namespace

TEST_CASE("path tree coalesces after one step") {
  const Tree p = path_tree(10);
  const auto tr = explore_ancestral_lines(p, 2);
  CHECK(tr.termination == 1);
  CHECK(tr.terminal_label == 9);
  CHECK(tr.terminal_depth == 8);
  CHECK(tr.coalesced_pair == std::pair<std::size_t, std::size_t>{0, 1});
  REQUIRE(tr.steps.size() == 1);
  CHECK(tr.steps[0].revealed == 9);
  CHECK(tr.steps[0].line == 0);
}

TEST_CASE("start validation") {
  const Tree t = grow_tree(Mesoscopic{0.5}, 50, 1);
  CHECK_THROWS_AS(explore_ancestral_lines(t, 1), InvalidArgument);
  CHECK_THROWS_AS(explore_ancestral_lines(grow_tree(Mesoscopic{0.5}, 2, 1), 3), InvalidArgument);
  CHECK_THROWS_AS(explore_ancestral_lines(t, 2, std::vector<Label>{40, 40}), InvalidArgument);
  CHECK_THROWS_AS(explore_ancestral_lines(t, 2, std::vector<Label>{30, 40}), InvalidArgument);
  CHECK_THROWS_AS(explore_ancestral_lines(t, 2, std::vector<Label>{51, 40}), InvalidArgument);
  CHECK_THROWS_AS(explore_ancestral_lines(t, 3, std::vector<Label>{50, 40}), InvalidArgument);
  const auto tr = explore_ancestral_lines(t, 2, std::vector<Label>{45, 20});
  CHECK(tr.starts == std::vector<Label>{45, 20});
  CHECK_FALSE(tr.starts_in_window);
  CHECK(explore_ancestral_lines(t, 2).starts_in_window);
}

TEST_CASE("counting identity on random mesoscopic trees") {
  for (int r = 0; r < 1000; ++r) {
    const Tree t = grow_tree(Mesoscopic{0.5}, 10000, derive_seed(21, r));
    const std::size_t k = 2 + r % 4;
    check_trace_invariants(explore_ancestral_lines(t, k));
  }
}

TEST_CASE("terminal branchpoint agrees with the spanned subtree") {
  // The exploration stops at the first coincidence it sees, which is the
  // MRCA of the coalesced pair. With k > 2 this need not be the branchpoint
  // of largest label: a line can jump below a pending merger of two others.
  Rng rng(31);
  int top = 0;
  for (int r = 0; r < 500; ++r) {
    const Label n = 2 + rng.below(999);
    const std::size_t k = 2 + rng.below(std::min<Label>(n - 1, 5));
    const MemorySchedule s = r % 2 ? MemorySchedule{Mesoscopic{0.3 + 0.1 * (r % 6)}}
                                   : MemorySchedule{Macroscopic{0.2 + 0.1 * (r % 7)}};
    const Tree t = grow_tree(s, n, derive_seed(32, r));
    const auto tr = explore_ancestral_lines(t, k);
    check_trace_invariants(tr);
    const auto sub = spanned_subtree(t, tr.starts);
    REQUIRE(!sub.branchpoints.empty());
    const auto [a, b] = tr.coalesced_pair;
    CHECK(2 * tr.terminal_depth == sub.leaf_depths[a] + sub.leaf_depths[b] - sub.distance(a, b));
    const auto hit = std::find_if(sub.branchpoints.begin(), sub.branchpoints.end(),
                                  [&](const Branchpoint& bp) { return bp.label == tr.terminal_label; });
    REQUIRE(hit != sub.branchpoints.end());
    CHECK(hit->depth == tr.terminal_depth);
    if (k == 2) CHECK(sub.branchpoints.front().label == tr.terminal_label);
    top += sub.branchpoints.front().label == tr.terminal_label;
  }
  CHECK(top >= 400);
}

TEST_CASE("first coincidence below a pending merger") {
  // 31 -> 19 -> 17 and 32 -> 17 merge at 17, but 33 -> 24 -> 11 meets
  // 34 -> 11 first because 24 is expanded before 19.
  std::vector<Label> p(36, 0);
  const std::pair<Label, Label> edges[] = {
      {2, 1},   {3, 1},   {4, 3},   {5, 1},   {6, 1},   {7, 4},   {8, 7},   {9, 6},   {10, 8},
      {11, 6},  {12, 10}, {13, 10}, {14, 10}, {15, 4},  {16, 5},  {17, 6},  {18, 12}, {19, 17},
      {20, 17}, {21, 6},  {22, 6},  {23, 16}, {24, 11}, {25, 9},  {26, 7},  {27, 19}, {28, 14},
      {29, 9},  {30, 10}, {31, 19}, {32, 17}, {33, 24}, {34, 11}, {35, 12}};
  for (auto [v, q] : edges) p[v] = q;
  const Tree t = Tree::from_parents(p);
  const auto tr = explore_ancestral_lines(t, 6);
  CHECK(tr.terminal_label == 11);
  CHECK(tr.coalesced_pair == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(spanned_subtree(t, tr.starts).branchpoints.front().label == 17);
}

TEST_CASE("trace CSV") {
  const auto tr = explore_ancestral_lines(path_tree(5), 3);
  std::ostringstream os;
  write_trace_csv(tr, os);
  CHECK(os.str().rfind("m,revealed_label,chosen_line,M_1,M_2,M_3\n1,4,1,1,0,0\n", 0) == 0);
}

TEST_CASE("chain basics") {
  CHECK(simulate_chain(1, 0.5, 3) == std::vector<Label>{1});
  CHECK(simulate_chain(1, 0.5, 3, {}, ChainConvention::kPaperLiteral) == std::vector<Label>{1, 0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = simulate_chain(20000, 0.5, seed);
    CHECK(c.front() == 20000);
    CHECK(c.back() == 1);
    for (std::size_t i = 1; i < c.size(); ++i) {
      const Window w = window(Mesoscopic{0.5}, c[i - 1] - 1);
      REQUIRE(c[i] >= w.lo);
      REQUIRE(c[i] <= w.hi);
    }
    const auto lit = simulate_chain(20000, 0.5, seed, {}, ChainConvention::kPaperLiteral);
    CHECK(lit.back() == 0);
    for (std::size_t i = 1; i < lit.size(); ++i) {
      const Label jump = lit[i - 1] - lit[i];
      REQUIRE(jump >= 1);
      REQUIRE(jump <= floor_pow(lit[i - 1], 0.5));
    }
    const auto stopped = simulate_chain(20000, 0.5, seed, ChainStop{10000});
    CHECK(stopped.back() <= 10000);
    CHECK(stopped[stopped.size() - 2] > 10000);
  }
}

TEST_CASE("chain length concentrates") {
  int inside = 0;
  for (int r = 0; r < 1000; ++r) {
    const auto c = simulate_chain(1000000, 0.5, derive_seed(41, r));
    const double ratio = double(c.size() - 1) / 1000.0;
    inside += std::abs(ratio - 4.0) <= 0.4;
  }
  CHECK(inside >= 900);
}

TEST_CASE("chain and full-tree ancestor chain agree in law") {
  const int reps = 400;
  double s1 = 0, q1 = 0, s2 = 0, q2 = 0;
  for (int r = 0; r < reps; ++r) {
    const double a = double(simulate_chain(100000, 0.5, derive_seed(51, r)).size() - 1);
    const auto g = grow_streaming(Mesoscopic{0.5}, 100000, derive_seed(52, r), {true, false});
    const double b = (*g.depth)[100000];
    s1 += a;
    q1 += a * a;
    s2 += b;
    q2 += b * b;
  }
  const double m1 = s1 / reps, m2 = s2 / reps;
  const double v1 = q1 / reps - m1 * m1, v2 = q2 / reps - m2 * m2;
  CHECK(std::abs(m1 - m2) <= 4.0 * std::sqrt((v1 + v2) / reps));
  CHECK(v1 / v2 == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("chain follows the fluid limit") {
  int good = 0;
  for (int r = 0; r < 100; ++r) {
    const auto c = simulate_chain(1000000, 0.5, derive_seed(61, r));
    good += chain_fluid_deviation(c, 1000000, 0.5, 3.0) <= 0.02;
  }
  CHECK(good >= 95);
  // deviation of the exact fluid path sampled at the grid is tiny
  std::vector<Label> ideal;
  for (Label i = 0;; ++i) {
    const double f = f_beta(0.5, i / 1000.0);
    ideal.push_back(static_cast<Label>(std::llround(f * 1e6)));
    if (f == 0.0) break;
  }
  CHECK(chain_fluid_deviation(ideal, 1000000, 0.5, 3.0) <= 0.0011);
}

TEST_CASE("branchpoint statistics") {
  const auto a = branchpoint_statistics(0.5, 100000, 2, 40, 71, 1);
  const auto b = branchpoint_statistics(0.5, 100000, 2, 40, 71, 4);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].depth == b[i].depth);
    CHECK(a[i].seed == derive_seed(71, i));
    CHECK(a[i].scaled_depth <= 1.3);
    CHECK(a[i].scaled_depth == doctest::Approx(a[i].depth / (4.0 * std::sqrt(1e5))));
  }
  std::ostringstream os;
  write_branchpoint_csv(a, os);
  CHECK(os.str().rfind("replication,seed,depth,scaled_depth\n0,", 0) == 0);
}

TEST_CASE("line balance") {
  const auto recs = branchpoint_statistics(0.5, 1000000, 3, 50, 81, 2);
  int good = 0;
  for (const auto& r : recs) good += r.max_line_imbalance <= 0.1;
  CHECK(good >= 45);
}
