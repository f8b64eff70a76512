#pragma once

// Numerical self-checks for the identities behind the update rule:
//
//   grad L(theta; theta') = E_theta[S T] - E_theta[S] E_theta[T]
//   grad l(theta; theta)  = E_p[T] - E_theta[T],       l = ln L
//   hess l(theta; theta)  = Var_p[T] - Var_theta[T]
//
// plus the consistency of the sample (1 - rho)-quantile. Analytic sides are
// Monte Carlo estimates of the right-hand sides; numeric sides are central
// finite differences of the Monte Carlo estimate of L, taken with common
// random numbers (the same standard normal draws pushed through the perturbed
// parameters).

#include "gass/engine.hpp"
#include "gass/gaussian.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gass {

/// A theta-independent shape function, e.g. exp.
using ShapeFunction = std::function<double(double)>;

struct GradCheckReport {
  Vector analytic;
  Vector numeric;
  double relative_error = 0.0;  // ||analytic - numeric||_inf / ||numeric||_inf
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
  bool inconclusive = false;  // shape values were constant across the sample
};

GradCheckReport check_gradient_l(const NaturalParam& theta, const ShapeFunction& shape,
                                 const Objective& objective, std::int64_t mc_samples,
                                 double fd_step, std::uint64_t seed);

GradCheckReport check_gradient_L(const NaturalParam& theta, const ShapeFunction& shape,
                                 const Objective& objective, std::int64_t mc_samples,
                                 double fd_step, std::uint64_t seed);

struct VarianceCheckReport {
  Matrix monte_carlo;
  Matrix analytic;
  double max_relative_diag_error = 0.0;
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo Var_theta[T] against analytic_var_T.
VarianceCheckReport check_hessian_second_term(const NaturalParam& theta, std::int64_t mc_samples,
                                              std::uint64_t seed);

struct QuantileCheckReport {
  double rho = 0.0;
  double target = 0.0;  // standard normal (1 - rho)-quantile
  std::vector<std::int64_t> sizes;
  std::vector<double> mean_abs_error;  // averaged over replications, one per size
  int replications = 0;
  bool decreasing = false;
};

/// H(x) = x under a standard normal; |gamma_hat_N - target| per N.
QuantileCheckReport check_quantile_consistency(double rho, const std::vector<std::int64_t>& sizes,
                                               int replications, std::uint64_t seed);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  double metric = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// The standard battery: 1-D quadratic objective with S = exp, mu = 0.3,
/// sigma^2 = 1, 1e5 samples; Var[T] at 1e6 samples; quantiles at rho = 0.1
/// over N in {1e3, 1e4, 1e5} and 20 replications.
std::vector<CheckOutcome> run_self_check(std::uint64_t seed);

}  // namespace gass
