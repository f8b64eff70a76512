#pragma once

// Quantile-based shape function and self-normalized sample weights.
//
//   S(H) = (H - H_lb) / (1 + exp(-s0 (H - gamma)))
//
// With a large s0 the logistic factor is a smooth stand-in for I{H >= gamma},
// so the weights concentrate on the elite fraction rho of the batch.

#include "gass/gaussian.hpp"

#include <variant>

namespace gass {

struct FixedLowerBound {
  double value = 0.0;
};

/// min(H) - delta * max(1, max(H) - min(H))
struct BatchMinMinus {
  double delta = 0.01;
};

using LowerBoundPolicy = std::variant<FixedLowerBound, BatchMinMinus>;

struct ShapeSpec {
  double s0 = 1e5;
  double rho = 0.05;
  LowerBoundPolicy lower_bound = BatchMinMinus{};

  void validate() const;
};

struct WeightedValues {
  Vector raw_shape;
  Vector weights;
};

/// The ceil((1 - rho) N)-th smallest value (1-based order statistic).
double sample_quantile(const Vector& values, double rho);

/// 1 / (1 + exp(-t)) without overflow for any finite t.
double logistic(double t);

/// Elementwise shape values. Outputs are floored at the smallest positive
/// normal double so that every weight stays strictly positive.
Vector shape_values(const Vector& h_values, double gamma, const ShapeSpec& spec, double h_lb);

double resolve_lower_bound(const Vector& h_values, const LowerBoundPolicy& policy);

Vector normalize_weights(const Vector& raw_shape);

/// quantile -> lower bound -> shape values -> weights, for one batch.
WeightedValues weigh_batch(const Vector& h_values, const ShapeSpec& spec);

}  // namespace gass
