#pragma once

// Independent multivariate Gaussian written as an exponential family
//
//   f(x; theta) = exp{ theta^T T(x) - phi(theta) },  T(x) = (x_1..x_n, x_1^2..x_n^2).
//
// Every 2n-vector and 2n x 2n matrix in the library uses this ordering of the
// sufficient statistics: the n linear entries first, then the n quadratic ones.

#include <Eigen/Dense>

#include <random>

namespace gass {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Natural parameters. `quadratic` must be strictly negative.
struct NaturalParam {
  Vector linear;
  Vector quadratic;

  Eigen::Index dim() const { return linear.size(); }

  /// (linear, quadratic) concatenated.
  Vector stacked() const;
  static NaturalParam from_stacked(const Vector& v);
};

/// E[T(X)]: first and second raw moments per coordinate.
struct MeanMoments {
  Vector first;
  Vector second;

  Vector stacked() const;
};

struct Moments {
  Vector mean;
  Vector variance;
};

/// Throws InvalidParameter unless every component is finite and every
/// quadratic coefficient is strictly negative.
void validate(const NaturalParam& theta);

Moments to_moments(const NaturalParam& theta);
NaturalParam from_moments(const Vector& mean, const Vector& variance);

MeanMoments expected_T(const NaturalParam& theta);

/// Exact covariance of T(X) under f(.; theta). Only the (x_i, x_i^2) pairs
/// are correlated; entries across coordinates are zero.
Matrix analytic_var_T(const NaturalParam& theta);

/// T(x) = (x, x.^2).
Vector sufficient_stats(const Eigen::Ref<const Vector>& x);

/// count x n matrix of independent N(0,1) draws.
Matrix standard_normals(Eigen::Index count, Eigen::Index n, Rng& rng);

/// Maps standard normal draws row-wise through x = mean + sd * z.
Matrix transform_normals(const NaturalParam& theta, const Matrix& z);

/// count i.i.d. draws (one per row) from f(.; theta).
Matrix sample(const NaturalParam& theta, Eigen::Index count, Rng& rng);

double log_density(const NaturalParam& theta, const Eigen::Ref<const Vector>& x);

}  // namespace gass
