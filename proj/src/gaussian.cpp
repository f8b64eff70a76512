#include "gass/gaussian.hpp"

#include "gass/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gass {

namespace {

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidParameter(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

Vector NaturalParam::stacked() const {
  Vector v(2 * dim());
  v << linear, quadratic;
  return v;
}

NaturalParam NaturalParam::from_stacked(const Vector& v) {
  if (v.size() % 2 != 0) {
    throw InvalidParameter("natural parameter vector must have even length");
  }
  const Eigen::Index n = v.size() / 2;
  return NaturalParam{v.head(n), v.tail(n)};
}

Vector MeanMoments::stacked() const {
  Vector v(first.size() + second.size());
  v << first, second;
  return v;
}

void validate(const NaturalParam& theta) {
  require_same_size(theta.linear, theta.quadratic, "natural parameter");
  if (theta.dim() == 0) {
    throw InvalidParameter("natural parameter has dimension 0");
  }
  for (Eigen::Index i = 0; i < theta.dim(); ++i) {
    if (!std::isfinite(theta.linear[i]) || !std::isfinite(theta.quadratic[i])) {
      throw InvalidParameter("natural parameter component " + std::to_string(i) + " is not finite");
    }
    if (!(theta.quadratic[i] < 0.0)) {
      throw InvalidParameter("quadratic natural parameter " + std::to_string(i) +
                             " must be negative, got " + std::to_string(theta.quadratic[i]));
    }
  }
}

Moments to_moments(const NaturalParam& theta) {
  validate(theta);
  Moments m;
  m.variance = (-0.5) * theta.quadratic.cwiseInverse();
  m.mean = theta.linear.cwiseProduct(m.variance);
  return m;
}

NaturalParam from_moments(const Vector& mean, const Vector& variance) {
  require_same_size(mean, variance, "moments");
  for (Eigen::Index i = 0; i < variance.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(variance[i]) || !(variance[i] > 0.0)) {
      throw InvalidParameter("variance " + std::to_string(i) + " must be positive and finite");
    }
  }
  NaturalParam theta;
  theta.linear = mean.cwiseQuotient(variance);
  theta.quadratic = (-0.5) * variance.cwiseInverse();
  return theta;
}

MeanMoments expected_T(const NaturalParam& theta) {
  const Moments m = to_moments(theta);
  return MeanMoments{m.mean, m.mean.cwiseAbs2() + m.variance};
}

Matrix analytic_var_T(const NaturalParam& theta) {
  const Moments m = to_moments(theta);
  const Eigen::Index n = theta.dim();
  Matrix v = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = m.mean[i];
    const double s2 = m.variance[i];
    v(i, i) = s2;
    v(i, n + i) = v(n + i, i) = 2.0 * mu * s2;
    v(n + i, n + i) = 2.0 * s2 * s2 + 4.0 * mu * mu * s2;
  }
  return v;
}

Vector sufficient_stats(const Eigen::Ref<const Vector>& x) {
  Vector t(2 * x.size());
  t << x, x.cwiseAbs2();
  return t;
}

Matrix standard_normals(Eigen::Index count, Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(count, n);
  // Row-major fill so the stream order does not depend on Eigen's storage order.
  for (Eigen::Index r = 0; r < count; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      z(r, c) = normal(rng);
    }
  }
  return z;
}

Matrix transform_normals(const NaturalParam& theta, const Matrix& z) {
  const Moments m = to_moments(theta);
  if (z.cols() != theta.dim()) {
    throw InvalidParameter("normal draws have " + std::to_string(z.cols()) +
                           " columns, expected " + std::to_string(theta.dim()));
  }
  const Eigen::RowVectorXd sd = m.variance.cwiseSqrt().transpose();
  Matrix x = z.array().rowwise() * sd.array();
  x.rowwise() += m.mean.transpose();
  return x;
}

Matrix sample(const NaturalParam& theta, Eigen::Index count, Rng& rng) {
  validate(theta);
  if (count < 1) {
    throw InvalidParameter("sample count must be positive");
  }
  return transform_normals(theta, standard_normals(count, theta.dim(), rng));
}

double log_density(const NaturalParam& theta, const Eigen::Ref<const Vector>& x) {
  const Moments m = to_moments(theta);
  if (x.size() != theta.dim()) {
    throw InvalidParameter("log_density: point has wrong dimension");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - m.mean[i];
    acc -= 0.5 * (std::log(2.0 * std::numbers::pi * m.variance[i]) + d * d / m.variance[i]);
  }
  return acc;
}

}  // namespace gass
