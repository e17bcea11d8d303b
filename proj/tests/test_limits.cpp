#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "lmrt/errors.hpp"
#include "lmrt/limits.hpp"

using namespace lmrt;

namespace {

const double kThetas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

// Brute-force mu(a): dense grid in lambda followed by local refinement.
double grid_mu(double theta, double a) {
  double best = std::numeric_limits<double>::infinity(), arg = 1.0;
  for (double lam = 1.0001; lam < 400.0; lam *= 1.0005) {
    const double v = phi(theta, lam) * std::exp(lam * a);
    if (v < best) {
      best = v;
      arg = lam;
    }
  }
  for (double lam = std::max(1.0, arg / 1.0005); lam <= arg * 1.0005; lam += arg * 1e-7)
    best = std::min(best, phi(theta, lam) * std::exp(lam * a));
  return best;
}

// Trapezoid with many panels, as an independent check on the quadrature.
double trapezoid_pmf(double theta, std::uint64_t k) {
  const double r = 1.0 / (1.0 - theta), c = std::log(1.0 / theta);
  auto pois = [](double m, std::uint64_t j) {
    return std::exp(-m + j * std::log(m) - std::lgamma(j + 1.0));
  };
  auto f = [&](double t) { return t == 0.0 ? (k == 1 ? 1.0 : 0.0) : std::exp(-t) * pois(r * t, k - 1); };
  const int panels = 400000;
  const double h = c / panels;
  double s = 0.5 * (f(0.0) + f(c));
  for (int i = 1; i < panels; ++i) s += f(i * h);
  return s * h + std::exp(-c) * pois(r * c, k - 1);
}

}  // namespace

TEST_CASE("f_beta") {
  for (double b : {0.2, 0.5, 0.9}) {
    CHECK(f_beta(b, 0.0) == 1.0);
    CHECK(f_beta(b, 2.0 / (1.0 - b)) == doctest::Approx(0.0));
    CHECK(f_beta(b, 2.0 / (1.0 - b) + 1.0) == 0.0);
    CHECK(f_beta(b, 2.0 / (1.0 - b) - 1e-9) == doctest::Approx(0.0).epsilon(1e-6));
  }
  CHECK(f_beta(0.5, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(f_beta(1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(f_beta(0.5, -1.0), InvalidArgument);
  CHECK(height_constant_meso(0.5) == 4.0);
}

TEST_CASE("phi and mu") {
  for (double t : kThetas) {
    CHECK(phi(t, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu_of(t, 0.0) < 1.0);
    double prev = 0.0;
    for (double a = 0.0; a < c_theta(t); a += 0.05) {
      const double m = mu_of(t, a);
      CHECK(m >= prev - 1e-12);
      prev = m;
    }
    for (double a : {0.05, 0.2, 0.5})
      CHECK(mu_of(t, a) == doctest::Approx(grid_mu(t, a)).epsilon(1e-7));
  }
}

TEST_CASE("kappa against brute-force bisection") {
  for (double t : {0.1, 0.5, 0.9}) {
    double lo = 0.0, hi = c_theta(t);
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      (grid_mu(t, mid) < 1.0 ? lo : hi) = mid;
    }
    const double k = kappa(t);
    CHECK(k == doctest::Approx(lo).epsilon(1e-6));
    CHECK(k > 0.0);
    CHECK(k < c_theta(t));
  }
  // theta -> 0 recovers the uniform recursive tree: kappa -> 1/e.
  CHECK(kappa(1e-9) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("lambda_mgf and legendre") {
  for (double t : kThetas) {
    CHECK(lambda_mgf(t, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(lambda_mgf(t, 1.0) == doctest::Approx(std::log((1.0 + t) / 2.0)).epsilon(1e-14));
    // lambda = -1: E[1/X] = -log(theta) / (1 - theta)
    CHECK(lambda_mgf(t, -1.0) == doctest::Approx(std::log(-std::log(t) / (1.0 - t))).epsilon(1e-12));
    CHECK(lambda_mgf(t, -1.0 + 1e-9) == doctest::Approx(lambda_mgf(t, -1.0)).epsilon(1e-7));
    for (double lam : {-5.0, -1.0, -0.3, 0.0, 0.7, 2.0, 30.0}) {
      const double h = 1e-5;
      const double fd = (lambda_mgf(t, lam + h) - lambda_mgf(t, lam - h)) / (2 * h);
      CHECK(lambda_mgf_derivative(t, lam) == doctest::Approx(fd).epsilon(1e-6));
    }
    const double z = lambda_mgf_derivative(t, 2.0);
    CHECK(std::abs(legendre(t, z) - (2.0 * z - lambda_mgf(t, 2.0))) <= 1e-9);
    CHECK(std::isinf(legendre(t, 0.1)));
    CHECK(std::isinf(legendre(t, std::log(t) - 0.1)));
    CHECK(mu_drift(t) == doctest::Approx((1 - t + t * std::log(t)) / (1 - t)));
  }
}

TEST_CASE("height constant duality") {
  for (double t : kThetas) {
    const double k = kappa(t, 1e-9), a = alpha_max(t, 1e-12);
    CHECK(std::abs(k * a - 1.0) <= 1e-6);
    CHECK(a > 1.0 / mu_drift(t));
    CHECK(psi(t, a) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(psi(t, 0.99 * a) < 1.0);
  }
  const auto hc = height_constants(0.5);
  CHECK(hc.theta == 0.5);
  CHECK(hc.c_theta == doctest::Approx(std::log(2.0)));
  std::ostringstream os;
  write_constants_csv({hc}, os);
  CHECK(os.str().rfind("theta,kappa,alpha_max,mu_drift,c_theta\n0.5,", 0) == 0);
}

TEST_CASE("degree pmfs") {
  CHECK(macro_degree_pmf(0.5, 1) == doctest::Approx(5.0 / 12.0).epsilon(1e-10));
  CHECK(std::abs(macro_degree_pmf(0.5, 1) - 5.0 / 12.0) <= 1e-10);
  for (double t : kThetas) {
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= 200; ++k) sum += macro_degree_pmf(t, k);
    CHECK(std::abs(sum - 1.0) <= 1e-8);
    for (std::uint64_t k : {1, 2, 3, 6})
      CHECK(std::abs(macro_degree_pmf(t, k) - trapezoid_pmf(t, k)) <= 1e-8);
  }
  CHECK(macro_degree_pmf(0.5, 0) == 0.0);
  CHECK(meso_degree_pmf(1) == doctest::Approx(std::exp(-1.0)));
  CHECK(meso_degree_pmf(4) == doctest::Approx(std::exp(-1.0) / 6.0));
  CHECK(poisson_pmf(2.0, 3) == doctest::Approx(std::exp(-2.0) * 8.0 / 6.0));
}

TEST_CASE("shape probabilities") {
  CHECK(poisson_gw_shape_probability("()") == doctest::Approx(std::exp(-1.0)));
  CHECK(poisson_gw_shape_probability("((()))") == doctest::Approx(std::exp(-3.0)));
  // two leaves below the root: e^-3 / 2!
  CHECK(poisson_gw_shape_probability("(()())") == doctest::Approx(std::exp(-3.0) / 2.0));
  // Shapes of each size s carry the Borel mass e^{-s} s^{s-1} / s!.
  const std::size_t counts[] = {0, 1, 1, 2, 4, 9, 20, 48};
  const auto shapes = enumerate_shapes(7);
  CHECK(shapes.size() == 1 + 1 + 2 + 4 + 9 + 20 + 48);
  for (std::size_t s = 1; s <= 7; ++s) {
    double mass = 0.0;
    std::size_t n = 0;
    for (const auto& c : shapes)
      if (code_size(c) == s) {
        mass += poisson_gw_shape_probability(c);
        ++n;
      }
    CHECK(n == counts[s]);
    const double borel = std::exp(-double(s) + (s - 1.0) * std::log(double(s)) - std::lgamma(s + 1.0));
    CHECK(mass == doctest::Approx(borel).epsilon(1e-12));
  }
}

TEST_CASE("branchpoint law") {
  const BranchpointLaw law(4);
  REQUIRE(law.exponents.size() == 3);
  CHECK(law.exponents[0] == doctest::Approx(1.0 / 48.0));
  CHECK(law.exponents[2] == doctest::Approx(1.0 / 8.0));
  for (std::size_t i = 1; i < law.exponents.size(); ++i) CHECK(law.exponents[i] > law.exponents[i - 1]);
  for (double x : {0.0, 0.3, 0.9, 0.99, 1.0}) {
    CHECK(branchpoint_cdf(2, 1, x) == doctest::Approx(std::pow(x, 8.0)));
    CHECK(branchpoint_cdf(5, 4, x) == doctest::Approx(std::pow(x, 80.0)));
    // k = 3, l = 1: -log X_1 = E/24 + E'/8
    CHECK(branchpoint_cdf(3, 1, x) ==
          doctest::Approx(1.5 * std::pow(x, 8.0) - 0.5 * std::pow(x, 24.0)).epsilon(1e-12));
  }
  // median of X_1 for k = 2
  CHECK(branchpoint_cdf(2, 1, std::pow(2.0, -1.0 / 8.0)) == doctest::Approx(0.5));
  CHECK(std::pow(2.0, -1.0 / 8.0) == doctest::Approx(0.917004).epsilon(1e-6));
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = branchpoint_cdf(6, 2, i / 100.0);
    CHECK(c >= prev - 1e-15);
    prev = c;
  }
  CHECK(prev == doctest::Approx(1.0));
  CHECK_THROWS_AS(branchpoint_cdf(3, 3, 0.5), InvalidArgument);
}

TEST_CASE("n_j bounds") {
  // n_j(1, 1/2): i = 1 (0 <= 1) and i = 2 (2 - 1.414 <= 1) qualify; i = 3 does not.
  CHECK(n_j_count(1, 0.5) == 2);
  for (double b : {0.25, 0.5, 0.75}) {
    std::uint64_t j0 = 0;
    // every j up to 2e4, then a sparse stride to 1e6
    for (std::uint64_t j = 1; j <= 1000000; j += j < 20000 ? 1 : 997) {
      const double jb = std::pow(double(j), b);
      const auto nj = n_j_count(j, b);
      REQUIRE(double(nj) >= jb - 1.0);
      if (double(nj) > 1.2 * jb) j0 = j + 1;
    }
    CHECK(j0 < 10000);
  }
  CHECK(poisson_tv_bound(10000, 1000000, 0.5, 1.5) >= 0.0);
  CHECK_THROWS_AS(poisson_tv_bound(10, 100, 0.5, 1.0), InvalidArgument);
}
