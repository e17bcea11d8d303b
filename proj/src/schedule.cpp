#include "lmrt/schedule.hpp"

#include <cmath>
#include <sstream>

#include "lmrt/errors.hpp"

namespace lmrt {
namespace {

enum Kind { kMacro = 0, kMeso = 1, kSarrt = 2, kCustom = 3 };

Label isqrt(Label n) {
  auto r = static_cast<Label>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

Label macro_lo(double theta, Label n) {
  const auto j =
      static_cast<Label>(std::floor(static_cast<long double>(theta) * n));
  return j < 1 ? 1 : j;
}

void check_unit_interval(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream os;
    os << what << " must lie in (0,1), got " << x;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

Label floor_pow(Label n, double beta) {
  if (beta == 0.5) return isqrt(n);
  return static_cast<Label>(
      std::floor(std::pow(static_cast<long double>(n),
                          static_cast<long double>(beta))));
}

Window window(const MemorySchedule& schedule, Label n) {
  if (n == 0) throw InvalidArgument("window: n must be >= 1");
  switch (schedule.index()) {
    case kMacro:
      return {macro_lo(std::get<Macroscopic>(schedule).theta, n), n};
    case kMeso: {
      const Label s = floor_pow(n, std::get<Mesoscopic>(schedule).beta);
      return {s >= n ? 1 : n - s, n};
    }
    case kSarrt:
      throw WindowlessSchedule();
    default: {
      const Label j = std::get<CustomJ>(schedule).j(n);
      if (j > n) {
        std::ostringstream os;
        os << "custom j(" << n << ") = " << j << " exceeds n";
        throw InvalidArgument(os.str());
      }
      return {j < 1 ? 1 : j, n};
    }
  }
}

bool is_windowed(const MemorySchedule& schedule) {
  return schedule.index() != kSarrt;
}

void validate(const MemorySchedule& schedule, Label scan_to) {
  switch (schedule.index()) {
    case kMacro:
      check_unit_interval(std::get<Macroscopic>(schedule).theta, "theta");
      return;
    case kMeso:
      check_unit_interval(std::get<Mesoscopic>(schedule).beta, "beta");
      return;
    case kSarrt: {
      const auto& q = std::get<Sarrt>(schedule).quantile;
      if (!q) throw InvalidArgument("sarrt quantile is empty");
      if (q(0.0) < 0.0 || q(1.0) > 1.0)
        throw InvalidArgument("sarrt quantile must map into [0,1]");
      double prev = q(0.0);
      for (int i = 1; i <= 1000; ++i) {
        const double cur = q(i / 1000.0);
        if (cur < prev) throw InvalidArgument("sarrt quantile not monotone");
        prev = cur;
      }
      return;
    }
    default: {
      const auto& j = std::get<CustomJ>(schedule).j;
      if (!j) throw InvalidArgument("custom j is empty");
      Label prev = 0;
      for (Label n = 1; n <= scan_to; ++n) {
        const Label v = j(n);
        if (v < 1 || v > n) {
          std::ostringstream os;
          os << "custom j(" << n << ") = " << v << " outside [1, n]";
          throw InvalidArgument(os.str());
        }
        if (v < prev) throw InvalidArgument("custom j is not non-decreasing");
        prev = v;
      }
    }
  }
}

std::string describe(const MemorySchedule& schedule) {
  std::ostringstream os;
  os.precision(17);
  switch (schedule.index()) {
    case kMacro:
      os << "macroscopic(theta=" << std::get<Macroscopic>(schedule).theta
         << ")";
      break;
    case kMeso:
      os << "mesoscopic(beta=" << std::get<Mesoscopic>(schedule).beta << ")";
      break;
    case kSarrt:
      os << "sarrt(" << std::get<Sarrt>(schedule).name << ")";
      break;
    default:
      os << "custom_j(" << std::get<CustomJ>(schedule).name << ")";
  }
  return os.str();
}

MemorySchedule sarrt_uniform(double theta) {
  if (!(theta >= 0.0 && theta < 1.0))
    throw InvalidArgument("theta must lie in [0,1) for a uniform sarrt");
  std::ostringstream name;
  name.precision(17);
  name << "uniform(" << theta << ",1)";
  return Sarrt{[theta](double u) { return theta + (1.0 - theta) * u; },
               name.str()};
}

MemorySchedule full_memory_schedule() {
  return CustomJ{[](Label) -> Label { return 1; }, "full_memory"};
}

WindowCursor::WindowCursor(const MemorySchedule& schedule)
    : schedule_(&schedule), kind_(static_cast<int>(schedule.index())) {
  if (kind_ == kSarrt) throw WindowlessSchedule();
  if (kind_ == kMacro) param_ = std::get<Macroscopic>(schedule).theta;
  if (kind_ == kMeso) param_ = std::get<Mesoscopic>(schedule).beta;
}

Window WindowCursor::next(Label m) {
  switch (kind_) {
    case kMacro:
      return {macro_lo(param_, m), m};
    case kMeso: {
      if (m >= threshold_) {
        size_ = floor_pow(m, param_);
        // Smallest m' > m with floor_pow(m') > size_, located from a
        // closed-form guess and corrected against floor_pow itself.
        const Label target = size_ + 1;
        auto guess = static_cast<Label>(std::ceil(
            std::pow(static_cast<long double>(target), 1.0L / param_)));
        if (guess <= m) guess = m + 1;
        while (guess > m + 1 && floor_pow(guess - 1, param_) >= target)
          --guess;
        while (floor_pow(guess, param_) < target) ++guess;
        threshold_ = guess;
      }
      return {size_ >= m ? 1 : m - size_, m};
    }
    default:
      return window(*schedule_, m);
  }
}

}  // namespace lmrt
