#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmrt {

/// AHU canonical form of a small rooted tree: a vertex is "(" followed by its
/// children's codes in lexicographic order, then ")". Two rooted trees are
/// isomorphic iff their codes are equal.
struct FringeTree {
  std::string code;
  std::size_t size = 0;

  friend bool operator==(const FringeTree&, const FringeTree&) = default;
};

/// A fringe, or std::nullopt when it exceeded the size cap.
using FringeResult = std::optional<FringeTree>;

/// Key used for the truncated mass in distributions and CSV files.
inline constexpr std::string_view kTruncatedKey = "truncated";

/// Canonical code of a tree on local vertices 0..m-1 rooted at 0, given
/// `parent[i] < i` for i >= 1 (parent[0] ignored).
std::string canonical_code(std::span<const std::size_t> parent);

/// Inverse direction: local parent array of a code, vertices in preorder.
/// Throws InvalidArgument for malformed codes.
std::vector<std::size_t> parse_code(std::string_view code);

std::size_t code_size(std::string_view code);

/// Counts of canonical codes plus a separate truncated bucket.
struct FringeDistribution {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t truncated = 0;
  std::uint64_t total = 0;

  void add(const FringeResult& fringe);
  double frequency(std::string_view code) const;
  double truncated_frequency() const;

  /// Probability map including the `truncated` key; sums to 1.
  std::map<std::string, double> probabilities() const;

  /// Restriction to codes of size <= max_size; everything else (including
  /// truncation) lands in the `truncated` key.
  std::map<std::string, double> probabilities_up_to(std::size_t max_size) const;
};

/// `code,count,frequency` rows, truncated mass last.
void write_fringe_csv(const FringeDistribution& dist, std::ostream& out);

}  // namespace lmrt
