#include "lmrt/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "lmrt/errors.hpp"
#include "lmrt/rng.hpp"

namespace lmrt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    std::ostringstream os;
    os << "theta must lie in (0,1), got " << theta;
    throw InvalidArgument(os.str());
  }
}

/// log phi(lambda) for lambda > 0.
double log_phi(double theta, double lambda) {
  const double L = std::log(theta);
  return std::log(-std::expm1(lambda * L)) - std::log(lambda) -
         std::log1p(-theta);
}

/// Golden-section minimum of a convex function on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 400 && (hi - lo) > tol * std::max(1.0, lo); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(lo), f(hi)});
}

template <typename F>
double simpson_adaptive(F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return simpson_adaptive(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_adaptive(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double eps) {
  constexpr int kPanels = 8;
  double total = 0.0;
  const double h = (b - a) / kPanels;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * h, hi = lo + h;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_adaptive(f, lo, hi, fa, fm, fb, whole, eps / kPanels, 50);
  }
  return total;
}

/// Genealogy of a CTBP stopped at `horizon`. `births(rng, window, out)`
/// appends the ages (within [0, window]) at which one individual reproduces.
template <typename Births>
FringeResult grow_ctbp(Rng& rng, double horizon, std::size_t cap,
                       Births&& births) {
  if (cap == 0) return std::nullopt;
  std::vector<double> born{0.0};
  std::vector<std::size_t> parent{0};
  std::vector<double> ages;
  for (std::size_t head = 0; head < born.size(); ++head) {
    ages.clear();
    births(rng, horizon - born[head], ages);
    for (double a : ages) {
      if (born.size() >= cap) return std::nullopt;
      born.push_back(born[head] + a);
      parent.push_back(head);
    }
  }
  return FringeTree{canonical_code(parent), parent.size()};
}

/// Splits "(c1c2...)" into its top-level child codes.
std::vector<std::string_view> child_codes(std::string_view code) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 1;
  for (std::size_t i = 1; i + 1 < code.size(); ++i) {
    depth += code[i] == '(' ? 1 : -1;
    if (depth == 0) {
      out.push_back(code.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

double f_beta(double beta, double t) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
  if (!(t >= 0.0)) throw InvalidArgument("f_beta: t must be >= 0");
  const double base = 1.0 - 0.5 * (1.0 - beta) * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (1.0 - beta));
}

double height_constant_meso(double beta) { return 2.0 / (1.0 - beta); }

double c_theta(double theta) {
  check_theta(theta);
  return -std::log(theta);
}

double mu_drift(double theta) {
  check_theta(theta);
  return (1.0 - theta + theta * std::log(theta)) / (1.0 - theta);
}

double phi(double theta, double lambda) {
  check_theta(theta);
  if (!(lambda > 0.0)) throw InvalidArgument("phi: lambda must be > 0");
  return -std::expm1(lambda * std::log(theta)) / (lambda * (1.0 - theta));
}

double mu_of(double theta, double a, double tol) {
  check_theta(theta);
  if (!(a >= 0.0)) throw InvalidArgument("mu_of: a must be >= 0");
  auto g = [&](double lambda) { return log_phi(theta, lambda) + lambda * a; };

  // Geometric probes until the objective rises three times in a row.
  std::vector<double> probe{1.0};
  std::vector<double> value{g(1.0)};
  int rises = 0;
  double step = 0.5;
  while (rises < 3 && probe.back() < 1e15) {
    probe.push_back(1.0 + step);
    value.push_back(g(probe.back()));
    rises = value.back() > value[value.size() - 2] ? rises + 1 : 0;
    step *= 1.5;
  }
  if (rises < 3) return std::exp(value.back());  // a == 0: inf is a limit
  const auto best = static_cast<std::size_t>(
      std::min_element(value.begin(), value.end()) - value.begin());
  const double lo = best == 0 ? 1.0 : probe[best - 1];
  const double hi = probe[std::min(best + 1, probe.size() - 1)];
  return std::exp(golden_min(g, lo, hi, tol));
}

double kappa(double theta, double tol) {
  check_theta(theta);
  double lo = 0.0, hi = c_theta(theta);
  if (mu_of(theta, hi) < 1.0) {
    std::ostringstream os;
    os << "kappa: mu(c_theta) < 1 for theta=" << theta
       << "; bisection interval [0, " << hi << "] does not bracket";
    throw NumericError(os.str());
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mu_of(theta, mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double lambda_mgf(double theta, double lambda) {
  check_theta(theta);
  const double L = std::log(theta);
  const double s = lambda + 1.0;
  // E[X^lambda] = (1 - theta^s) / (s (1 - theta)), limit -L/(1-theta) at s=0.
  double log_num;
  if (std::abs(s) < 1e-12) {
    log_num = std::log(-L) + std::log1p(0.5 * s * L);
  } else if (s > 0.0) {
    log_num = std::log(-std::expm1(s * L)) - std::log(s);
  } else {
    log_num = s * L + std::log(-std::expm1(-s * L)) - std::log(-s);
  }
  return log_num - std::log1p(-theta);
}

double lambda_mgf_derivative(double theta, double lambda) {
  check_theta(theta);
  const double L = std::log(theta);
  const double y = -(lambda + 1.0) * L;
  double g;
  if (std::abs(y) < 1e-4)
    g = -0.5 + y / 12.0 - y * y * y / 720.0;
  else
    g = 1.0 / std::expm1(y) - 1.0 / y;
  return -L * g;
}

double legendre(double theta, double z) {
  check_theta(theta);
  const double L = std::log(theta);
  if (!(z > L && z < 0.0)) return kInf;
  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (lambda_mgf_derivative(theta, lo) > z) {
    lo *= 2.0;
    if (++guard > 2000) throw NumericError("legendre: lower bracket failed");
  }
  while (lambda_mgf_derivative(theta, hi) < z) {
    hi *= 2.0;
    if (++guard > 2000) throw NumericError("legendre: upper bracket failed");
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (lambda_mgf_derivative(theta, mid) < z)
      lo = mid;
    else
      hi = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  return lambda * z - lambda_mgf(theta, lambda);
}

double psi(double theta, double c) {
  if (!(c > 0.0)) throw InvalidArgument("psi: c must be > 0");
  return c * legendre(theta, -1.0 / c);
}

double alpha_max(double theta, double tol) {
  const double c0 = 1.0 / mu_drift(theta);
  double lo = c0, hi = c0 * 1.25;
  int steps = 0;
  while (!(psi(theta, hi) > 1.0)) {
    lo = hi;
    hi *= 1.25;
    if (++steps > 400) {
      std::ostringstream os;
      os << "alpha_max: psi never exceeded 1 on [" << c0 << ", " << hi << "]";
      throw NumericError(os.str());
    }
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (psi(theta, mid) > 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

HeightConstants height_constants(double theta, double tol) {
  return {theta,           kappa(theta, tol), alpha_max(theta, tol * 1e-3),
          mu_drift(theta), c_theta(theta),    tol};
}

void write_constants_csv(const std::vector<HeightConstants>& rows,
                         std::ostream& out) {
  out << "theta,kappa,alpha_max,mu_drift,c_theta\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.theta,
                  r.kappa, r.alpha_max, r.mu_drift, r.c_theta);
    out << buf;
  }
}

double poisson_pmf(double mean, std::uint64_t k) {
  if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
  const auto kd = static_cast<double>(k);
  return std::exp(-mean + kd * std::log(mean) - std::lgamma(kd + 1.0));
}

double meso_degree_pmf(std::uint64_t k) {
  return k == 0 ? 0.0 : poisson_pmf(1.0, k - 1);
}

double macro_degree_pmf(double theta, std::uint64_t k, double quad_tol) {
  check_theta(theta);
  if (k == 0) return 0.0;
  const double rate = 1.0 / (1.0 - theta);
  const double c = c_theta(theta);
  auto integrand = [&](double t) {
    return std::exp(-t) * poisson_pmf(rate * t, k - 1);
  };
  const double body = integrate(integrand, 0.0, c, quad_tol);
  return body + std::exp(-c) * poisson_pmf(rate * c, k - 1);
}

FringeResult sample_macro_fringe(double theta, std::uint64_t seed,
                                 std::size_t size_cap,
                                 std::optional<double> horizon) {
  check_theta(theta);
  const double rate = 1.0 / (1.0 - theta);
  const double c = c_theta(theta);
  Rng rng(seed);
  const double stop = horizon ? *horizon : rng.exponential();
  return grow_ctbp(rng, stop, size_cap,
                   [&](Rng& r, double window, std::vector<double>& ages) {
                     const double limit = std::min(c, window);
                     for (double a = r.exponential(rate); a <= limit;
                          a += r.exponential(rate))
                       ages.push_back(a);
                   });
}

FringeResult sample_sarrt_fringe(const std::function<double(double)>& density,
                                 double envelope, std::uint64_t seed,
                                 std::size_t size_cap,
                                 std::optional<double> horizon) {
  if (!(envelope > 0.0)) throw InvalidArgument("envelope must be > 0");
  Rng rng(seed);
  const double stop = horizon ? *horizon : rng.exponential();
  return grow_ctbp(
      rng, stop, size_cap, [&](Rng& r, double window, std::vector<double>& ages) {
        for (double a = r.exponential(envelope); a <= window;
             a += r.exponential(envelope)) {
          const double intensity = density(std::exp(-a));
          if (intensity > envelope * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "thinning envelope " << envelope << " exceeded: intensity "
               << intensity << " at age " << a;
            throw NumericError(os.str());
          }
          if (r.uniform() * envelope < intensity) ages.push_back(a);
        }
      });
}

std::function<double(double)> uniform_density(double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
    throw InvalidArgument("uniform_density: need 0 <= lo < hi <= 1");
  const double height = 1.0 / (hi - lo);
  return [lo, hi, height](double u) {
    return (u >= lo && u <= hi) ? height : 0.0;
  };
}

FringeResult sample_poisson_gw(std::uint64_t seed, std::size_t size_cap) {
  if (size_cap == 0) return std::nullopt;
  Rng rng(seed);
  std::vector<std::size_t> parent{0};
  for (std::size_t head = 0; head < parent.size(); ++head) {
    const std::uint64_t kids = rng.poisson(1.0);
    for (std::uint64_t c = 0; c < kids; ++c) {
      if (parent.size() >= size_cap) return std::nullopt;
      parent.push_back(head);
    }
  }
  return FringeTree{canonical_code(parent), parent.size()};
}

double poisson_gw_shape_probability(std::string_view code) {
  parse_code(code);  // validates
  const auto kids = child_codes(code);
  std::map<std::string_view, int> multiplicity;
  double p = std::exp(-1.0);
  for (auto child : kids) {
    ++multiplicity[child];
    p *= poisson_gw_shape_probability(child);
  }
  for (const auto& [child, m] : multiplicity) p /= std::tgamma(m + 1.0);
  return p;
}

std::set<std::string> enumerate_shapes(std::size_t max_size) {
  std::set<std::string> out;
  for (std::size_t m = 1; m <= max_size; ++m) {
    // Every recursive labelling: parent[i] ranges over 0..i-1.
    std::vector<std::size_t> parent(m, 0);
    while (true) {
      out.insert(canonical_code(parent));
      std::size_t i = m;
      while (i-- > 1) {
        if (++parent[i] < i) break;
        parent[i] = 0;
      }
      if (i == 0 || m == 1) break;
    }
  }
  return out;
}

BranchpointLaw::BranchpointLaw(std::uint64_t k_) : k(k_) {
  if (k < 2) throw InvalidArgument("branchpoint law needs k >= 2");
  for (std::uint64_t l = k; l >= 2; --l)
    exponents.push_back(1.0 / (4.0 * static_cast<double>(l * (l - 1))));
}

std::vector<double> branchpoint_sample(std::uint64_t k, std::uint64_t seed) {
  const BranchpointLaw law(k);
  Rng rng(seed);
  std::vector<double> x(k - 1);
  double cur = 1.0;
  for (std::size_t i = 0; i < law.exponents.size(); ++i) {
    cur *= std::pow(rng.uniform_pos(), law.exponents[i]);
    x[k - 2 - i] = cur;
  }
  return x;
}

double branchpoint_cdf(std::uint64_t k, std::uint64_t l, double x) {
  if (k < 2 || l < 1 || l > k - 1)
    throw InvalidArgument("branchpoint_cdf: need k >= 2 and 1 <= l <= k-1");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  std::vector<double> rates;
  for (std::uint64_t m = l + 1; m <= k; ++m)
    rates.push_back(4.0 * static_cast<double>(m * (m - 1)));
  double total = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double coef = 1.0;
    for (std::size_t j = 0; j < rates.size(); ++j)
      if (j != i) coef *= rates[j] / (rates[j] - rates[i]);
    total += coef * std::pow(x, rates[i]);
  }
  return std::clamp(total, 0.0, 1.0);
}

std::uint64_t n_j_count(std::uint64_t j, double beta) {
  if (j < 1) throw InvalidArgument("n_j_count: j must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
  const auto jl = static_cast<long double>(j);
  const auto bound = static_cast<std::uint64_t>(
      2.0L * std::pow(jl, static_cast<long double>(beta)) + jl + 2.0L);
  std::uint64_t count = 0;
  // i - i^beta is increasing for i >= 1, so the first failure is final.
  for (std::uint64_t i = j; i <= bound; ++i) {
    const auto il = static_cast<long double>(i);
    if (il - std::pow(il, static_cast<long double>(beta)) > jl) break;
    ++count;
  }
  return count;
}

double poisson_tv_bound(std::uint64_t j, std::uint64_t n, double beta,
                        double eps) {
  if (!(eps > 1.0)) throw InvalidArgument("poisson_tv_bound: eps must be > 1");
  if (j < 1 || j > n) throw InvalidArgument("poisson_tv_bound: need 1 <= j <= n");
  const double jd = static_cast<double>(j);
  const double jb = std::pow(jd, beta);
  double bound = eps * (1.0 - std::pow(1.0 + eps * std::pow(jd, beta - 1.0), -beta)) +
                 eps / jb + std::max(eps - 1.0, 1.0 / jb);
  const std::uint64_t nj = n_j_count(j, beta);
  if (nj >= n - j)
    bound += std::abs(static_cast<double>(n - j) / jb - 1.0);
  return bound;
}

}  // namespace lmrt
