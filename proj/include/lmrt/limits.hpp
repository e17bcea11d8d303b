#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lmrt/fringe.hpp"

namespace lmrt {

// ---------------------------------------------------------------------------
// Ancestor-chain fluid limit

/// (1 - (1-beta) t / 2)^{1/(1-beta)} on [0, 2/(1-beta)], 0 afterwards.
double f_beta(double beta, double t);

/// 2/(1-beta): the scaled height constant and absorption time of f_beta.
double height_constant_meso(double beta);

// ---------------------------------------------------------------------------
// Macroscopic height constants
//
// Two independent routes to the same number:
//  * first-birth route:  phi, mu_of, kappa
//  * large-deviation route for V ~ U[theta, 1]: lambda_mgf, legendre, psi,
//    alpha_max
// and alpha_max(theta) * kappa(theta) == 1.

/// c_theta = log(1/theta), the age at which BP_theta stops reproducing.
double c_theta(double theta);

/// E[-log X] for X ~ U[theta, 1].
double mu_drift(double theta);

/// (1 - theta^lambda) / (lambda (1 - theta)).
double phi(double theta, double lambda);

/// inf_{lambda > 1} phi(lambda) e^{lambda a}. The log-objective is convex in
/// lambda; the minimiser is bracketed by geometric growth and refined by
/// golden-section search.
double mu_of(double theta, double a, double tol = 1e-12);

/// sup{a : mu_of(a) < 1} by bisection on [0, c_theta].
double kappa(double theta, double tol = 1e-9);

/// log E[X^lambda] for X ~ U[theta, 1], stable through lambda = -1.
double lambda_mgf(double theta, double lambda);
double lambda_mgf_derivative(double theta, double lambda);

/// sup_lambda (lambda z - Lambda(lambda)); +inf outside (log theta, 0).
double legendre(double theta, double z);

/// c * Lambda*(-1/c).
double psi(double theta, double c);

/// inf{c > 1/mu_drift : psi(c) > 1} by geometric bracketing + bisection.
double alpha_max(double theta, double tol = 1e-12);

struct HeightConstants {
  double theta;
  double kappa;
  double alpha_max;
  double mu_drift;
  double c_theta;
  double solver_tolerance;
};

HeightConstants height_constants(double theta, double tol = 1e-9);

/// `theta,kappa,alpha_max,mu_drift,c_theta` rows.
void write_constants_csv(const std::vector<HeightConstants>& rows,
                         std::ostream& out);

// ---------------------------------------------------------------------------
// Limiting degree laws

double poisson_pmf(double mean, std::uint64_t k);

/// Mesoscopic limit: P(deg = k) = e^{-1} / (k-1)!, k >= 1.
double meso_degree_pmf(std::uint64_t k);

/// Macroscopic limit: P(N_theta(T_1) = k-1), by adaptive Simpson on
/// [0, c_theta] plus the closed-form tail beyond c_theta.
double macro_degree_pmf(double theta, std::uint64_t k, double quad_tol = 1e-10);

// ---------------------------------------------------------------------------
// Fringe samplers. All return std::nullopt when the genealogy exceeds
// size_cap. `horizon` overrides the Exp(1) stopping time (test hook).

/// BP_theta: each individual gives birth at the points of a rate 1/(1-theta)
/// Poisson process on ages [0, c_theta]; individuals born before T_1 kept.
FringeResult sample_macro_fringe(double theta, std::uint64_t seed,
                                 std::size_t size_cap,
                                 std::optional<double> horizon = {});

/// CTBP with age intensity f_V(e^{-x}), simulated by thinning a rate
/// `envelope` Poisson process. Throws NumericError if the intensity exceeds
/// the envelope.
FringeResult sample_sarrt_fringe(const std::function<double(double)>& density,
                                 double envelope, std::uint64_t seed,
                                 std::size_t size_cap,
                                 std::optional<double> horizon = {});

/// Density of U[lo, hi] on [0, 1].
std::function<double(double)> uniform_density(double lo, double hi);

/// Critical Poisson(1) Galton-Watson tree, grown breadth first.
FringeResult sample_poisson_gw(std::uint64_t seed, std::size_t size_cap);

/// Probability that a Poisson(1) GW tree has the given shape:
/// prod over vertices of e^{-1} / prod(multiplicities of equal child codes)!.
double poisson_gw_shape_probability(std::string_view code);

/// All canonical codes of rooted trees with 1..max_size vertices.
std::set<std::string> enumerate_shapes(std::size_t max_size);

// ---------------------------------------------------------------------------
// Branchpoint law at beta = 1/2

struct BranchpointLaw {
  explicit BranchpointLaw(std::uint64_t k);

  std::uint64_t k;
  /// 1/(4 l (l-1)) for l = k, k-1, ..., 2.
  std::vector<double> exponents;
};

/// (X_1 < ... < X_{k-1}): X_{k-1} = U^{1/(4k(k-1))},
/// X_{l-1} = X_l U^{1/(4l(l-1))}.
std::vector<double> branchpoint_sample(std::uint64_t k, std::uint64_t seed);

/// P(X_l <= x). -log X_l is a sum of independent exponentials with rates
/// 4m(m-1), m = l+1..k, so the law is hypoexponential in -log x; for
/// l = k-1 this is x^{4k(k-1)}.
double branchpoint_cdf(std::uint64_t k, std::uint64_t l, double x);

// ---------------------------------------------------------------------------
// Poisson approximation diagnostics (mesoscopic)

/// |{i >= j : i - i^beta <= j}| by direct scan.
std::uint64_t n_j_count(std::uint64_t j, double beta);

/// Right-hand side of the Poisson approximation bound for the degree of
/// vertex j at time n, with slack eps > 1.
double poisson_tv_bound(std::uint64_t j, std::uint64_t n, double beta,
                        double eps);

}  // namespace lmrt
