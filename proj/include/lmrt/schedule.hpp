#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace lmrt {

/// Vertex labels are 1-based; vertex 1 is the root.
using Label = std::uint64_t;

/// j(n) = floor(theta * n).
struct Macroscopic {
  double theta;
};

/// j(n) = n - floor(n^beta).
struct Mesoscopic {
  double beta;
};

/// Scaled attachment: vertex m+1 attaches to max(1, floor(m * V)) with
/// V = quantile(U), U uniform on [0,1).
struct Sarrt {
  std::function<double(double)> quantile;
  std::string name = "custom";
};

/// Arbitrary window start j(n).
struct CustomJ {
  std::function<Label(Label)> j;
  std::string name = "custom";
};

using MemorySchedule = std::variant<Macroscopic, Mesoscopic, Sarrt, CustomJ>;

struct Window {
  Label lo;
  Label hi;
  friend bool operator==(const Window&, const Window&) = default;
};

/// floor(n^beta) evaluated in extended precision; exact for beta = 1/2.
Label floor_pow(Label n, double beta);

/// Inclusive attachment window {max(1, j(n)), ..., n} offered to vertex n+1.
/// Throws WindowlessSchedule for Sarrt, InvalidArgument for n == 0.
Window window(const MemorySchedule& schedule, Label n);

inline Label window_lo(const MemorySchedule& schedule, Label n) {
  return window(schedule, n).lo;
}

/// Checks parameter ranges; for windowed schedules also scans n = 1..scan_to
/// for 1 <= j(n) <= n and monotonicity (Sarrt: quantile(0) >= 0,
/// quantile(1) <= 1 and monotone on a grid).
void validate(const MemorySchedule& schedule, Label scan_to = 1000);

bool is_windowed(const MemorySchedule& schedule);

/// Human-readable tag, e.g. "mesoscopic(beta=0.5)".
std::string describe(const MemorySchedule& schedule);

/// Schedules with a closed form.
MemorySchedule sarrt_uniform(double theta);  // V ~ U[theta, 1], theta in [0,1)
MemorySchedule full_memory_schedule();       // CustomJ with j == 1: the uniform recursive tree

/// Incremental window evaluation for m = 1, 2, 3, ... in order. Produces the
/// same bounds as window() while avoiding a pow() per vertex.
class WindowCursor {
 public:
  explicit WindowCursor(const MemorySchedule& schedule);

  /// Window offered to vertex m+1; m must increase by one per call.
  Window next(Label m);

 private:
  const MemorySchedule* schedule_;
  int kind_;
  double param_ = 0.0;
  Label size_ = 0;       // floor(m^beta) for the current m
  Label threshold_ = 1;  // smallest m with floor(m^beta) > size_
};

}  // namespace lmrt
