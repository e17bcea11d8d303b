#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "lmrt/errors.hpp"
#include "lmrt/fringe.hpp"
#include "lmrt/rng.hpp"

using namespace lmrt;

namespace {

using Parents = std::vector<std::size_t>;

// All parent arrays with parent[i] < i on m vertices.
std::vector<Parents> recursive_trees(std::size_t m) {
  std::vector<Parents> out;
  Parents p(m, 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == m) {
      out.push_back(p);
      return;
    }
    for (std::size_t q = 0; q < i; ++q) {
      p[i] = q;
      self(self, i + 1);
    }
  };
  rec(rec, 1);
  return out;
}

// Rooted isomorphism by trying every bijection fixing the root.
bool brute_isomorphic(const Parents& a, const Parents& b) {
  const std::size_t m = a.size();
  if (b.size() != m) return false;
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 1; i < m && ok; ++i) ok = perm[a[i]] == b[perm[i]];
    if (ok) return true;
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return false;
}

}  // namespace

TEST_CASE("small codes") {
  CHECK(canonical_code(Parents{0}) == "()");
  CHECK(canonical_code(Parents{0, 0}) == "(())");
  CHECK(canonical_code(Parents{0, 0, 1}) == "((()))");
  CHECK(canonical_code(Parents{0, 0, 0}) == "(()())");
  CHECK(code_size("((()())())") == 5);
}

TEST_CASE("AHU agrees with brute-force isomorphism, exhaustive to size 7") {
  for (std::size_t m = 1; m <= 7; ++m) {
    const auto trees = recursive_trees(m);
    std::vector<std::string> codes;
    for (const auto& t : trees) codes.push_back(canonical_code(t));
    // Brute force on representatives: each tree against one representative
    // per distinct brute-force class.
    std::vector<std::size_t> reps;
    std::vector<std::size_t> cls(trees.size());
    for (std::size_t i = 0; i < trees.size(); ++i) {
      std::size_t found = reps.size();
      for (std::size_t r = 0; r < reps.size(); ++r)
        if (brute_isomorphic(trees[i], trees[reps[r]])) {
          found = r;
          break;
        }
      if (found == reps.size()) reps.push_back(i);
      cls[i] = found;
    }
    for (std::size_t i = 0; i < trees.size(); ++i)
      for (std::size_t r = 0; r < reps.size(); ++r)
        REQUIRE((codes[i] == codes[reps[r]]) == (cls[i] == r));
    // Rooted unordered trees: 1, 1, 2, 4, 9, 20, 48.
    static const std::size_t kShapes[] = {0, 1, 1, 2, 4, 9, 20, 48};
    CHECK(reps.size() == kShapes[m]);
  }
}

TEST_CASE("code invariant under relabelling") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + rng.below(30);
    Parents p(m, 0);
    for (std::size_t i = 1; i < m; ++i) p[i] = rng.below(i);
    // Relabel by a random order that keeps parents before children.
    std::vector<std::size_t> order{0}, pos(m, 0);
    std::vector<std::size_t> ready;
    std::vector<std::vector<std::size_t>> kids(m);
    for (std::size_t i = 1; i < m; ++i) kids[p[i]].push_back(i);
    ready = kids[0];
    while (!ready.empty()) {
      const std::size_t pick = rng.below(ready.size());
      const std::size_t v = ready[pick];
      ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
      pos[v] = order.size();
      order.push_back(v);
      for (auto c : kids[v]) ready.push_back(c);
    }
    Parents q(m, 0);
    for (std::size_t i = 1; i < m; ++i) q[pos[i]] = pos[p[i]];
    const std::string code = canonical_code(p);
    CHECK(canonical_code(q) == code);
    CHECK(code_size(code) == m);
    CHECK(canonical_code(parse_code(code)) == code);
  }
}

TEST_CASE("parse_code rejects malformed input") {
  CHECK_THROWS_AS(parse_code(""), InvalidArgument);
  CHECK_THROWS_AS(parse_code("(()"), InvalidArgument);
  CHECK_THROWS_AS(parse_code("()()"), InvalidArgument);
  CHECK_THROWS_AS(parse_code("(x)"), InvalidArgument);
}

TEST_CASE("fringe distribution bookkeeping") {
  FringeDistribution d;
  d.add(FringeTree{"()", 1});
  d.add(FringeTree{"()", 1});
  d.add(FringeTree{"(())", 2});
  d.add(std::nullopt);
  CHECK(d.total == 4);
  CHECK(d.frequency("()") == doctest::Approx(0.5));
  CHECK(d.truncated_frequency() == doctest::Approx(0.25));
  double sum = 0.0;
  for (const auto& [k, p] : d.probabilities()) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  const auto up1 = d.probabilities_up_to(1);
  CHECK(up1.at("()") == doctest::Approx(0.5));
  CHECK(up1.at(std::string(kTruncatedKey)) == doctest::Approx(0.5));

  std::ostringstream csv;
  write_fringe_csv(d, csv);
  CHECK(csv.str() == "code,count,frequency\n(()),1,0.25\n(),2,0.5\ntruncated,1,0.25\n");
}
