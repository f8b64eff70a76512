#pragma once

// Gradient-based adaptive stochastic search over the natural parameters of an
// independent Gaussian sampling distribution.
//
// One iteration:
//   1. draw N_k candidates from f(.; theta_k) and evaluate the objective,
//   2. weight them with the quantile shape function,
//   3. theta_{k+1} = Proj{ theta_k + alpha_k (V + eps I)^{-1} (E_p[T] - E_theta[T]) }
//
// The averaging variant adds alpha_k c (theta_bar_k - theta_k) inside the
// projection. The modified cross-entropy baseline uses the same direction
// E_p[T] - E_theta[T] with no preconditioner, applied to the mean parameters.

#include "gass/gaussian.hpp"
#include "gass/shaping.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gass {

enum class Algorithm { gass, gass_avg, modified_ce };
enum class VarianceMode { sample_estimate, analytic };

std::string_view to_string(Algorithm a);
/// Accepts "gass", "gass_avg"/"gass-avg", "modified_ce"/"modified-ce".
Algorithm parse_algorithm(std::string_view name);

using Objective = std::function<double(const Vector&)>;

/// alpha_k = alpha0 / max(1,k)^alpha_exp,  N_k = ceil(n0 * max(1,k)^zeta)
struct Schedules {
  double alpha0 = 1.0;
  double alpha_exp = 0.05;
  std::int64_t n0 = 1000;
  double zeta = 0.0;

  double step_size(std::int64_t k) const;
  std::int64_t sample_size(std::int64_t k) const;
  void validate() const;
};

/// Gain of the modified cross-entropy baseline: scale / (k + offset)^exponent.
struct CeGain {
  double scale = 5.0;
  double offset = 100.0;
  double exponent = 0.501;

  double operator()(std::int64_t k) const;
};

/// Hyper-rectangle in natural-parameter space (sufficient-statistic ordering).
struct ProjectionBox {
  Vector lower;
  Vector upper;

  /// Box admitting |mean| <= mean_bound and var_min <= variance <= var_max,
  /// mapped into natural coordinates.
  static ProjectionBox from_moment_bounds(Eigen::Index n, double mean_bound, double var_min,
                                          double var_max);
  void validate(Eigen::Index n) const;
  bool contains(const NaturalParam& theta) const;
};

struct SampleBatch {
  Matrix solutions;  // one candidate per row
  Vector h_values;
  std::optional<WeightedValues> weighted;
};

struct EngineState {
  NaturalParam theta;
  NaturalParam theta_bar;
  std::int64_t iteration = 0;
  std::int64_t evals_used = 0;
  Vector best_solution;
  double best_value = -std::numeric_limits<double>::infinity();
};

struct EngineConfig {
  Algorithm algorithm = Algorithm::gass;
  double epsilon = 1e-8;
  double feedback_c = 0.1;
  ShapeSpec shape;
  Schedules schedules;
  CeGain ce_gain;
  ProjectionBox box;
  std::int64_t budget = 1'000'000;
  VarianceMode variance_mode = VarianceMode::sample_estimate;
  /// When set, candidates are clamped to [lower, upper] before evaluation.
  std::optional<std::pair<Vector, Vector>> evaluation_clamp;

  void validate(Eigen::Index n) const;
};

struct CurvePoint {
  std::int64_t cum_evals = 0;
  double best_so_far = 0.0;
};

struct RunResult {
  Vector best_solution;
  double best_value = 0.0;
  std::vector<CurvePoint> curve;
  NaturalParam final_theta;
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  std::int64_t evals_used = 0;
};

// Estimation primitives.

/// sum_i w_i T(x_i); requires batch.weighted.
Vector estimate_Ep(const SampleBatch& batch);

/// Unbiased sample covariance of T over the batch, in the one-pass form
/// (1/(N-1)) sum T T^T - (1/(N^2-N)) (sum T)(sum T)^T. The statistics are
/// shifted by T(x_0) before accumulation, which leaves the value unchanged
/// in exact arithmetic.
Matrix estimate_var_T(const SampleBatch& batch);

/// Solves (var_T + eps I) d = e_p - e_theta by Cholesky. Retries once with
/// 10 eps before throwing NumericalError.
Vector ascent_direction(const Matrix& var_T, double epsilon, const Vector& e_p,
                        const Vector& e_theta);

NaturalParam project(const NaturalParam& theta, const ProjectionBox& box);

/// ((k-1)/k) prev + theta/k
Vector running_average(const Vector& prev, const Vector& theta, std::int64_t k);

/// Samples and evaluates one batch; throws ObjectiveError on a non-finite value.
SampleBatch draw_batch(const NaturalParam& theta, std::int64_t count, const Objective& objective,
                       const EngineConfig& config, Rng& rng);

/// Preconditioned direction for a weighted batch drawn from theta.
Vector gass_direction(const SampleBatch& batch, const NaturalParam& theta,
                      const EngineConfig& config);

/// E_p[T] - E_theta[T] for a weighted batch, without a preconditioner.
Vector modified_ce_direction(const SampleBatch& batch, const NaturalParam& theta);

/// theta + alpha d + alpha feedback (theta_bar - theta), projected. d is the
/// preconditioned direction for the weighted batch.
NaturalParam gass_update(const NaturalParam& theta, const NaturalParam& theta_bar,
                         const SampleBatch& batch, double alpha, double feedback,
                         const EngineConfig& config);

/// eta + gain (E_p[T] - eta) in mean coordinates eta = E_theta[T], projected.
NaturalParam modified_ce_update(const NaturalParam& theta, const SampleBatch& batch, double gain,
                                const ProjectionBox& box);

// Iteration steps. Each one draws N_k samples, so evals_used grows by N_k.

EngineState step_gass(const EngineState& state, const Objective& objective,
                      const EngineConfig& config, Rng& rng);
EngineState step_gass_avg(const EngineState& state, const Objective& objective,
                          const EngineConfig& config, Rng& rng);
EngineState step_modified_ce(const EngineState& state, const Objective& objective,
                             const EngineConfig& config, Rng& rng);
EngineState step(const EngineState& state, const Objective& objective,
                 const EngineConfig& config, Rng& rng);

/// Initial state from moments. Zero variances are raised to the smallest
/// variance the projection box admits; theta is then projected.
EngineState initial_state(const Vector& mean, const Vector& variance, const ProjectionBox& box);

/// Iterates until the next batch would exceed the evaluation budget.
RunResult run(const EngineConfig& config, const Objective& objective, const Vector& mean0,
              const Vector& variance0, std::uint64_t seed);

}  // namespace gass
