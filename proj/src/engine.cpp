#include "gass/engine.hpp"

#include "gass/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gass {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gass:
      return "gass";
    case Algorithm::gass_avg:
      return "gass_avg";
    case Algorithm::modified_ce:
      return "modified_ce";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "gass") return Algorithm::gass;
  if (s == "gass_avg") return Algorithm::gass_avg;
  if (s == "modified_ce" || s == "ce") return Algorithm::modified_ce;
  throw InvalidParameter("unknown algorithm '" + std::string(name) +
                         "' (expected gass, gass-avg or modified-ce)");
}

double Schedules::step_size(std::int64_t k) const {
  const double kk = static_cast<double>(std::max<std::int64_t>(1, k));
  return alpha0 / std::pow(kk, alpha_exp);
}

std::int64_t Schedules::sample_size(std::int64_t k) const {
  if (zeta == 0.0) return n0;
  const double kk = static_cast<double>(std::max<std::int64_t>(1, k));
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(n0) * std::pow(kk, zeta)));
}

void Schedules::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw InvalidParameter("alpha0 must be positive");
  }
  if (!(alpha_exp > 0.0 && alpha_exp <= 1.0)) {
    throw InvalidParameter("alpha exponent must lie in (0, 1]");
  }
  if (n0 < 2) {
    throw InvalidParameter("sample size must be at least 2");
  }
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
    throw InvalidParameter("zeta must be nonnegative");
  }
}

double CeGain::operator()(std::int64_t k) const {
  return scale / std::pow(static_cast<double>(k) + offset, exponent);
}

ProjectionBox ProjectionBox::from_moment_bounds(Eigen::Index n, double mean_bound, double var_min,
                                                double var_max) {
  if (!(mean_bound > 0.0) || !(var_min > 0.0) || !(var_max > var_min)) {
    throw InvalidParameter("invalid moment bounds for projection box");
  }
  ProjectionBox box;
  box.lower.resize(2 * n);
  box.upper.resize(2 * n);
  box.lower.head(n).setConstant(-mean_bound / var_min);
  box.upper.head(n).setConstant(mean_bound / var_min);
  box.lower.tail(n).setConstant(-0.5 / var_min);
  box.upper.tail(n).setConstant(-0.5 / var_max);
  return box;
}

void ProjectionBox::validate(Eigen::Index n) const {
  if (lower.size() != 2 * n || upper.size() != 2 * n) {
    throw InvalidParameter("projection box must have 2n = " + std::to_string(2 * n) + " bounds");
  }
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (!(lower[i] < upper[i])) {
      throw InvalidParameter("projection box bound " + std::to_string(i) + " is empty");
    }
    if (i >= n && !(upper[i] < 0.0)) {
      throw InvalidParameter("projection box must keep quadratic parameters negative");
    }
  }
}

bool ProjectionBox::contains(const NaturalParam& theta) const {
  const Vector v = theta.stacked();
  return v.size() == lower.size() && (v.array() >= lower.array()).all() &&
         (v.array() <= upper.array()).all();
}

void EngineConfig::validate(Eigen::Index n) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameter("epsilon must be positive");
  }
  if (!(feedback_c >= 0.0) || !std::isfinite(feedback_c)) {
    throw InvalidParameter("feedback weight c must be nonnegative");
  }
  shape.validate();
  schedules.validate();
  box.validate(n);
  if (budget < schedules.sample_size(1)) {
    throw InvalidParameter("budget " + std::to_string(budget) + " is smaller than one batch (" +
                           std::to_string(schedules.sample_size(1)) + ")");
  }
  if (evaluation_clamp) {
    const auto& [lo, hi] = *evaluation_clamp;
    if (lo.size() != n || hi.size() != n || !(lo.array() <= hi.array()).all()) {
      throw InvalidParameter("evaluation clamp box is malformed");
    }
  }
}

Vector estimate_Ep(const SampleBatch& batch) {
  if (!batch.weighted) {
    throw InvalidParameter("estimate_Ep: batch has no weights");
  }
  const Vector& w = batch.weighted->weights;
  if (w.size() != batch.solutions.rows()) {
    throw InvalidParameter("estimate_Ep: weight count does not match batch size");
  }
  const Eigen::Index n = batch.solutions.cols();
  Vector out(2 * n);
  out.head(n) = batch.solutions.transpose() * w;
  out.tail(n) = batch.solutions.cwiseAbs2().transpose() * w;
  return out;
}

Matrix estimate_var_T(const SampleBatch& batch) {
  const Eigen::Index count = batch.solutions.rows();
  if (count < 2) {
    throw InvalidParameter("estimate_var_T: need at least two samples");
  }
  const Eigen::Index n = batch.solutions.cols();
  Matrix t(count, 2 * n);
  t.leftCols(n) = batch.solutions;
  t.rightCols(n) = batch.solutions.cwiseAbs2();
  const Eigen::RowVectorXd shift = t.row(0);
  t.rowwise() -= shift;

  const double nn = static_cast<double>(count);
  const Vector sum = t.colwise().sum().transpose();
  Matrix v(2 * n, 2 * n);
  v.setZero();
  v.selfadjointView<Eigen::Lower>().rankUpdate(t.transpose(), 1.0 / (nn - 1.0));
  v.selfadjointView<Eigen::Lower>().rankUpdate(sum, -1.0 / (nn * nn - nn));
  v.triangularView<Eigen::StrictlyUpper>() = v.transpose();
  return v;
}

Vector ascent_direction(const Matrix& var_T, double epsilon, const Vector& e_p,
                        const Vector& e_theta) {
  if (var_T.rows() != var_T.cols() || var_T.rows() != e_p.size() || e_p.size() != e_theta.size()) {
    throw InvalidParameter("ascent_direction: dimension mismatch");
  }
  if (!(epsilon > 0.0)) {
    throw InvalidParameter("ascent_direction: epsilon must be positive");
  }
  const Vector rhs = e_p - e_theta;
  const Matrix identity = Matrix::Identity(var_T.rows(), var_T.cols());
  for (double eps : {epsilon, 10.0 * epsilon}) {
    Eigen::LLT<Matrix> llt(var_T + eps * identity);
    if (llt.info() == Eigen::Success) {
      Vector d = llt.solve(rhs);
      if (d.allFinite()) return d;
    }
  }
  std::ostringstream msg;
  msg << "preconditioner is not positive definite (epsilon " << epsilon
      << ", diagonal range [" << var_T.diagonal().minCoeff() << ", "
      << var_T.diagonal().maxCoeff() << "])";
  throw NumericalError(msg.str());
}

NaturalParam project(const NaturalParam& theta, const ProjectionBox& box) {
  const Vector v = theta.stacked().cwiseMax(box.lower).cwiseMin(box.upper);
  return NaturalParam::from_stacked(v);
}

Vector running_average(const Vector& prev, const Vector& theta, std::int64_t k) {
  if (k < 1) {
    throw InvalidParameter("running_average: k must be at least 1");
  }
  const double kk = static_cast<double>(k);
  return ((kk - 1.0) / kk) * prev + theta / kk;
}

SampleBatch draw_batch(const NaturalParam& theta, std::int64_t count, const Objective& objective,
                       const EngineConfig& config, Rng& rng) {
  SampleBatch batch;
  batch.solutions = sample(theta, count, rng);
  batch.h_values.resize(count);
  Vector x(theta.dim());
  for (Eigen::Index i = 0; i < count; ++i) {
    x = batch.solutions.row(i).transpose();
    if (config.evaluation_clamp) {
      x = x.cwiseMax(config.evaluation_clamp->first).cwiseMin(config.evaluation_clamp->second);
    }
    const double h = objective(x);
    if (!std::isfinite(h)) {
      std::ostringstream msg;
      msg << "objective returned " << h << " at x = [" << x.transpose() << "]";
      throw ObjectiveError(msg.str());
    }
    batch.h_values[i] = h;
  }
  return batch;
}

Vector gass_direction(const SampleBatch& batch, const NaturalParam& theta,
                      const EngineConfig& config) {
  const Vector e_p = estimate_Ep(batch);
  const Vector e_theta = expected_T(theta).stacked();
  const Matrix var = config.variance_mode == VarianceMode::analytic ? analytic_var_T(theta)
                                                                    : estimate_var_T(batch);
  return ascent_direction(var, config.epsilon, e_p, e_theta);
}

Vector modified_ce_direction(const SampleBatch& batch, const NaturalParam& theta) {
  return estimate_Ep(batch) - expected_T(theta).stacked();
}

namespace {

// Shared bookkeeping after theta_{k+1} is known.
EngineState advance(const EngineState& state, const SampleBatch& batch,
                    const EngineConfig& config, NaturalParam next) {
  EngineState out = state;
  Eigen::Index best = 0;
  const double batch_best = batch.h_values.maxCoeff(&best);
  if (batch_best > out.best_value) {
    out.best_value = batch_best;
    Vector x = batch.solutions.row(best).transpose();
    if (config.evaluation_clamp) {
      x = x.cwiseMax(config.evaluation_clamp->first).cwiseMin(config.evaluation_clamp->second);
    }
    out.best_solution = std::move(x);
  }
  out.theta = std::move(next);
  out.iteration = state.iteration + 1;
  out.theta_bar = NaturalParam::from_stacked(
      running_average(state.theta_bar.stacked(), out.theta.stacked(), out.iteration));
  out.evals_used = state.evals_used + batch.h_values.size();
  return out;
}

SampleBatch weighted_batch(const EngineState& state, const Objective& objective,
                           const EngineConfig& config, Rng& rng) {
  const std::int64_t count = config.schedules.sample_size(state.iteration);
  SampleBatch batch = draw_batch(state.theta, count, objective, config, rng);
  batch.weighted = weigh_batch(batch.h_values, config.shape);
  return batch;
}

EngineState gass_step_impl(const EngineState& state, const Objective& objective,
                           const EngineConfig& config, Rng& rng, double feedback) {
  const SampleBatch batch = weighted_batch(state, objective, config, rng);
  const double alpha = config.schedules.step_size(state.iteration);
  return advance(state, batch, config,
                 gass_update(state.theta, state.theta_bar, batch, alpha, feedback, config));
}

}  // namespace

EngineState step_gass(const EngineState& state, const Objective& objective,
                      const EngineConfig& config, Rng& rng) {
  return gass_step_impl(state, objective, config, rng, 0.0);
}

EngineState step_gass_avg(const EngineState& state, const Objective& objective,
                          const EngineConfig& config, Rng& rng) {
  return gass_step_impl(state, objective, config, rng, config.feedback_c);
}

NaturalParam gass_update(const NaturalParam& theta, const NaturalParam& theta_bar,
                         const SampleBatch& batch, double alpha, double feedback,
                         const EngineConfig& config) {
  const Vector current = theta.stacked();
  Vector next = current + alpha * gass_direction(batch, theta, config);
  if (feedback != 0.0) {
    next += alpha * feedback * (theta_bar.stacked() - current);
  }
  return project(NaturalParam::from_stacked(next), config.box);
}

NaturalParam modified_ce_update(const NaturalParam& theta, const SampleBatch& batch, double gain,
                                const ProjectionBox& box) {
  if (!batch.weighted) {
    throw InvalidParameter("modified_ce_update: batch has no weights");
  }
  // The mixture variance is formed from centred quantities rather than by
  // differencing raw second moments.
  const Moments current = to_moments(theta);
  const Vector& w = batch.weighted->weights;
  const Vector mean_p = batch.solutions.transpose() * w;
  const Matrix centred = batch.solutions.rowwise() - mean_p.transpose();
  const Vector var_p = centred.cwiseAbs2().transpose() * w;

  const Vector mean = current.mean + gain * (mean_p - current.mean);
  Vector variance = (1.0 - gain) * current.variance + gain * var_p +
                    gain * (1.0 - gain) * (current.mean - mean_p).cwiseAbs2();
  const double var_floor = -0.5 / box.lower[theta.dim()];
  variance = variance.cwiseMax(var_floor);
  return project(from_moments(mean, variance), box);
}

EngineState step_modified_ce(const EngineState& state, const Objective& objective,
                             const EngineConfig& config, Rng& rng) {
  const SampleBatch batch = weighted_batch(state, objective, config, rng);
  return advance(state, batch, config,
                 modified_ce_update(state.theta, batch, config.ce_gain(state.iteration), config.box));
}

EngineState step(const EngineState& state, const Objective& objective,
                 const EngineConfig& config, Rng& rng) {
  switch (config.algorithm) {
    case Algorithm::gass:
      return step_gass(state, objective, config, rng);
    case Algorithm::gass_avg:
      return step_gass_avg(state, objective, config, rng);
    case Algorithm::modified_ce:
      return step_modified_ce(state, objective, config, rng);
  }
  throw InvalidParameter("unknown algorithm");
}

EngineState initial_state(const Vector& mean, const Vector& variance, const ProjectionBox& box) {
  const Eigen::Index n = mean.size();
  box.validate(n);
  if (variance.size() != n) {
    throw InvalidParameter("initial mean and variance differ in length");
  }
  Vector var = variance;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (var[i] < 0.0 || !std::isfinite(var[i])) {
      throw InvalidParameter("initial variance must be nonnegative and finite");
    }
    if (var[i] == 0.0) var[i] = -0.5 / box.lower[n + i];
  }
  EngineState state;
  state.theta = project(from_moments(mean, var), box);
  state.theta_bar = state.theta;
  state.best_solution = mean;
  return state;
}

RunResult run(const EngineConfig& config, const Objective& objective, const Vector& mean0,
              const Vector& variance0, std::uint64_t seed) {
  const Eigen::Index n = mean0.size();
  config.validate(n);
  Rng rng(seed);
  EngineState state = initial_state(mean0, variance0, config.box);

  RunResult result;
  result.seed = seed;
  while (state.evals_used + config.schedules.sample_size(state.iteration) <= config.budget) {
    state = step(state, objective, config, rng);
    result.curve.push_back(CurvePoint{state.evals_used, state.best_value});
  }
  result.best_solution = state.best_solution;
  result.best_value = state.best_value;
  result.final_theta = state.theta;
  result.iterations = state.iteration;
  result.evals_used = state.evals_used;
  return result;
}

}  // namespace gass
