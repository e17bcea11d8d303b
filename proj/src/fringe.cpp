#include "lmrt/fringe.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "lmrt/errors.hpp"

namespace lmrt {

std::string canonical_code(std::span<const std::size_t> parent) {
  const std::size_t m = parent.size();
  if (m == 0) return {};
  std::vector<std::vector<std::size_t>> kids(m);
  for (std::size_t i = 1; i < m; ++i) {
    if (parent[i] >= i)
      throw InvalidArgument("canonical_code: parent[i] must be < i");
    kids[parent[i]].push_back(i);
  }
  std::vector<std::string> code(m);
  std::vector<std::string> parts;
  for (std::size_t i = m; i-- > 0;) {
    parts.clear();
    for (std::size_t c : kids[i]) parts.push_back(std::move(code[c]));
    std::sort(parts.begin(), parts.end());
    std::string& out = code[i];
    out.push_back('(');
    for (auto& p : parts) out += p;
    out.push_back(')');
  }
  return std::move(code[0]);
}

std::vector<std::size_t> parse_code(std::string_view code) {
  std::vector<std::size_t> parent;
  std::vector<std::size_t> stack;
  for (std::size_t pos = 0; pos < code.size(); ++pos) {
    const char c = code[pos];
    if (c == '(') {
      if (stack.empty() && !parent.empty())
        throw InvalidArgument("code has more than one root");
      parent.push_back(stack.empty() ? 0 : stack.back());
      stack.push_back(parent.size() - 1);
    } else if (c == ')') {
      if (stack.empty()) throw InvalidArgument("unbalanced code");
      stack.pop_back();
    } else {
      throw InvalidArgument("code alphabet is {(, )}");
    }
  }
  if (!stack.empty() || parent.empty())
    throw InvalidArgument("unbalanced code");
  return parent;
}

std::size_t code_size(std::string_view code) {
  return static_cast<std::size_t>(std::count(code.begin(), code.end(), '('));
}

void FringeDistribution::add(const FringeResult& fringe) {
  ++total;
  if (fringe)
    ++counts[fringe->code];
  else
    ++truncated;
}

double FringeDistribution::frequency(std::string_view code) const {
  if (total == 0) return 0.0;
  if (code == kTruncatedKey) return truncated_frequency();
  const auto it = counts.find(std::string(code));
  return it == counts.end() ? 0.0
                            : static_cast<double>(it->second) /
                                  static_cast<double>(total);
}

double FringeDistribution::truncated_frequency() const {
  return total == 0 ? 0.0
                    : static_cast<double>(truncated) / static_cast<double>(total);
}

std::map<std::string, double> FringeDistribution::probabilities() const {
  std::map<std::string, double> out;
  const auto denom = static_cast<double>(total);
  for (const auto& [code, count] : counts)
    out[code] = static_cast<double>(count) / denom;
  out[std::string(kTruncatedKey)] = truncated_frequency();
  return out;
}

std::map<std::string, double> FringeDistribution::probabilities_up_to(
    std::size_t max_size) const {
  std::map<std::string, double> out;
  const auto denom = static_cast<double>(total);
  std::uint64_t rest = truncated;
  for (const auto& [code, count] : counts) {
    if (code_size(code) <= max_size)
      out[code] = static_cast<double>(count) / denom;
    else
      rest += count;
  }
  out[std::string(kTruncatedKey)] = static_cast<double>(rest) / denom;
  return out;
}

void write_fringe_csv(const FringeDistribution& dist, std::ostream& out) {
  char buf[64];
  const auto denom = static_cast<double>(dist.total);
  out << "code,count,frequency\n";
  for (const auto& [code, count] : dist.counts) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(count) / denom);
    out << code << ',' << count << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.17g", dist.truncated_frequency());
  out << kTruncatedKey << ',' << dist.truncated << ',' << buf << '\n';
}

}  // namespace lmrt
