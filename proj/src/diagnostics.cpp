#include "gass/diagnostics.hpp"

#include "gass/errors.hpp"
#include "gass/shaping.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace gass {

namespace {

struct ShapeSample {
  Matrix z;       // common random numbers
  Matrix x;       // draws at theta
  Vector shaped;  // S(H(x_i))
};

Vector evaluate_shape(const Matrix& x, const ShapeFunction& shape, const Objective& objective) {
  Vector s(x.rows());
  Vector row(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    row = x.row(i).transpose();
    s[i] = shape(objective(row));
    if (!std::isfinite(s[i]) || !(s[i] > 0.0)) {
      throw InvalidParameter("shape function must be positive and finite on the sample");
    }
  }
  return s;
}

ShapeSample draw(const NaturalParam& theta, const ShapeFunction& shape, const Objective& objective,
                 std::int64_t mc_samples, std::uint64_t seed) {
  validate(theta);
  if (mc_samples < 2) throw InvalidParameter("need at least two Monte Carlo samples");
  Rng rng(seed);
  ShapeSample s;
  s.z = standard_normals(mc_samples, theta.dim(), rng);
  s.x = transform_normals(theta, s.z);
  s.shaped = evaluate_shape(s.x, shape, objective);
  return s;
}

Matrix stats_matrix(const Matrix& x) {
  const Eigen::Index n = x.cols();
  Matrix t(x.rows(), 2 * n);
  t.leftCols(n) = x;
  t.rightCols(n) = x.cwiseAbs2();
  return t;
}

bool degenerate(const Vector& s) {
  return s.maxCoeff() - s.minCoeff() <= 64.0 * std::numeric_limits<double>::epsilon() * s.maxCoeff();
}

// Central differences of L_hat(theta) = mean_i S(H(x_i(theta))) with fixed z.
template <class Transform>
Vector finite_difference(const NaturalParam& theta, const Matrix& z, const ShapeFunction& shape,
                         const Objective& objective, double h, Transform&& transform) {
  if (!(h > 0.0)) throw InvalidParameter("finite-difference step must be positive");
  const Vector base = theta.stacked();
  Vector grad(base.size());
  for (Eigen::Index j = 0; j < base.size(); ++j) {
    Vector plus = base, minus = base;
    plus[j] += h;
    minus[j] -= h;
    const double lp = evaluate_shape(transform_normals(NaturalParam::from_stacked(plus), z), shape,
                                     objective).mean();
    const double lm = evaluate_shape(transform_normals(NaturalParam::from_stacked(minus), z), shape,
                                     objective).mean();
    grad[j] = (transform(lp) - transform(lm)) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Vector& analytic, const Vector& numeric) {
  const double scale = numeric.cwiseAbs().maxCoeff();
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}

}  // namespace

GradCheckReport check_gradient_l(const NaturalParam& theta, const ShapeFunction& shape,
                                 const Objective& objective, std::int64_t mc_samples,
                                 double fd_step, std::uint64_t seed) {
  const ShapeSample s = draw(theta, shape, objective, mc_samples, seed);
  GradCheckReport rep;
  rep.samples_used = mc_samples;
  rep.seed = seed;
  rep.inconclusive = degenerate(s.shaped);

  const Vector w = s.shaped / s.shaped.sum();
  rep.analytic = stats_matrix(s.x).transpose() * w - expected_T(theta).stacked();
  rep.numeric = finite_difference(theta, s.z, shape, objective, fd_step,
                                  [](double v) { return std::log(v); });
  rep.relative_error = relative_error(rep.analytic, rep.numeric);
  return rep;
}

GradCheckReport check_gradient_L(const NaturalParam& theta, const ShapeFunction& shape,
                                 const Objective& objective, std::int64_t mc_samples,
                                 double fd_step, std::uint64_t seed) {
  const ShapeSample s = draw(theta, shape, objective, mc_samples, seed);
  GradCheckReport rep;
  rep.samples_used = mc_samples;
  rep.seed = seed;
  rep.inconclusive = degenerate(s.shaped);

  const double m = static_cast<double>(mc_samples);
  const Vector st = stats_matrix(s.x).transpose() * s.shaped / m;
  rep.analytic = st - (s.shaped.sum() / m) * expected_T(theta).stacked();
  rep.numeric =
      finite_difference(theta, s.z, shape, objective, fd_step, [](double v) { return v; });
  rep.relative_error = relative_error(rep.analytic, rep.numeric);
  return rep;
}

VarianceCheckReport check_hessian_second_term(const NaturalParam& theta, std::int64_t mc_samples,
                                              std::uint64_t seed) {
  validate(theta);
  if (mc_samples < 2) throw InvalidParameter("need at least two Monte Carlo samples");
  Rng rng(seed);
  const Matrix t = stats_matrix(sample(theta, mc_samples, rng));
  const Eigen::RowVectorXd mean = t.colwise().mean();
  const Matrix centred = t.rowwise() - mean;

  VarianceCheckReport rep;
  rep.samples_used = mc_samples;
  rep.seed = seed;
  rep.monte_carlo = centred.transpose() * centred / static_cast<double>(mc_samples - 1);
  rep.analytic = analytic_var_T(theta);
  for (Eigen::Index i = 0; i < rep.analytic.rows(); ++i) {
    const double err = std::abs(rep.monte_carlo(i, i) - rep.analytic(i, i)) / rep.analytic(i, i);
    rep.max_relative_diag_error = std::max(rep.max_relative_diag_error, err);
  }
  return rep;
}

QuantileCheckReport check_quantile_consistency(double rho, const std::vector<std::int64_t>& sizes,
                                               int replications, std::uint64_t seed) {
  if (sizes.empty()) throw InvalidParameter("no sample sizes given");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw InvalidParameter("sample sizes must be positive and increasing");
    }
  }
  if (replications < 1) throw InvalidParameter("need at least one replication");

  QuantileCheckReport rep;
  rep.rho = rho;
  rep.target = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - rho);
  rep.sizes = sizes;
  rep.replications = replications;
  const NaturalParam standard = from_moments(Vector::Zero(1), Vector::Ones(1));
  for (std::int64_t n : sizes) {
    double acc = 0.0;
    for (int r = 0; r < replications; ++r) {
      Rng rng(seed + static_cast<std::uint64_t>(r));
      const Vector h = sample(standard, n, rng).col(0);
      acc += std::abs(sample_quantile(h, rho) - rep.target);
    }
    rep.mean_abs_error.push_back(acc / replications);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.mean_abs_error.size(); ++i) {
    if (!(rep.mean_abs_error[i] < rep.mean_abs_error[i - 1])) rep.decreasing = false;
  }
  return rep;
}

std::vector<CheckOutcome> run_self_check(std::uint64_t seed) {
  constexpr std::int64_t kSamples = 100'000;
  constexpr double kStep = 1e-4;
  constexpr double kGradTol = 0.05;

  const NaturalParam theta = from_moments(Vector::Constant(1, 0.3), Vector::Ones(1));
  const Objective quadratic = [](const Vector& x) { return -x.squaredNorm(); };
  const ShapeFunction expo = [](double y) { return std::exp(y); };

  std::vector<CheckOutcome> out;

  const auto gl = check_gradient_l(theta, expo, quadratic, kSamples, kStep, seed);
  out.push_back({"gradient_l", !gl.inconclusive && gl.relative_error < kGradTol, gl.relative_error,
                 kGradTol, ""});

  const auto gL = check_gradient_L(theta, expo, quadratic, kSamples, kStep, seed);
  out.push_back({"gradient_L", !gL.inconclusive && gL.relative_error < kGradTol, gL.relative_error,
                 kGradTol, ""});

  // l = ln L, so grad l = grad L / L with L estimated on the same draws.
  {
    Rng rng(seed);
    const Matrix z = standard_normals(kSamples, 1, rng);
    Vector row(1);
    double l_hat = 0.0;
    const Matrix x = transform_normals(theta, z);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      row = x.row(i).transpose();
      l_hat += expo(quadratic(row));
    }
    l_hat /= static_cast<double>(kSamples);
    const double err = relative_error(gl.analytic, gL.analytic / l_hat);
    out.push_back({"gradient_chain_rule", err < 1e-9, err, 1e-9, ""});
  }

  const auto hv = check_hessian_second_term(from_moments(Vector::Zero(1), Vector::Ones(1)),
                                            1'000'000, seed);
  out.push_back({"hessian_var_T", hv.max_relative_diag_error < 0.05, hv.max_relative_diag_error,
                 0.05, ""});

  const auto qc = check_quantile_consistency(0.1, {1'000, 10'000, 100'000}, 20, seed);
  std::ostringstream detail;
  detail << "errors";
  for (double e : qc.mean_abs_error) detail << ' ' << e;
  detail << (qc.decreasing ? " decreasing" : " not decreasing");
  out.push_back({"quantile_consistency", qc.decreasing && qc.mean_abs_error.back() < 0.02,
                 qc.mean_abs_error.back(), 0.02, detail.str()});
  return out;
}

}  // namespace gass
