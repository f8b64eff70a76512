#include "gass/shaping.hpp"

#include "gass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gass {

void ShapeSpec::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) {
    throw InvalidParameter("s0 must be positive, got " + std::to_string(s0));
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw InvalidParameter("rho must lie in (0, 1), got " + std::to_string(rho));
  }
  if (const auto* b = std::get_if<BatchMinMinus>(&lower_bound); b && !(b->delta > 0.0)) {
    throw InvalidParameter("lower-bound delta must be positive");
  }
  if (const auto* f = std::get_if<FixedLowerBound>(&lower_bound); f && !std::isfinite(f->value)) {
    throw InvalidParameter("fixed lower bound must be finite");
  }
}

double sample_quantile(const Vector& values, double rho) {
  if (values.size() == 0) {
    throw InvalidParameter("sample_quantile: empty sample");
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw InvalidParameter("sample_quantile: rho must lie in (0, 1), got " + std::to_string(rho));
  }
  const auto n = static_cast<double>(values.size());
  // (1 - rho) N is usually meant to be an integer; the slack absorbs the
  // representation error of rho (e.g. 0.95 * 1000 = 949.99..).
  auto rank = static_cast<Eigen::Index>(std::ceil((1.0 - rho) * n - 1e-9));
  rank = std::clamp<Eigen::Index>(rank, 1, values.size());

  std::vector<double> sorted(values.data(), values.data() + values.size());
  auto nth = sorted.begin() + (rank - 1);
  std::nth_element(sorted.begin(), nth, sorted.end());
  return *nth;
}

double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Vector shape_values(const Vector& h_values, double gamma, const ShapeSpec& spec, double h_lb) {
  constexpr double floor = std::numeric_limits<double>::min();
  Vector s(h_values.size());
  for (Eigen::Index i = 0; i < h_values.size(); ++i) {
    const double h = h_values[i];
    if (!std::isfinite(h)) {
      throw InvalidParameter("shape_values: objective value " + std::to_string(i) + " is not finite");
    }
    if (!(h > h_lb)) {
      throw InvalidParameter("shape_values: lower bound " + std::to_string(h_lb) +
                             " is not below objective value " + std::to_string(h));
    }
    s[i] = std::max((h - h_lb) * logistic(spec.s0 * (h - gamma)), floor);
  }
  return s;
}

double resolve_lower_bound(const Vector& h_values, const LowerBoundPolicy& policy) {
  if (h_values.size() == 0) {
    throw InvalidParameter("resolve_lower_bound: empty sample");
  }
  const double lo = h_values.minCoeff();
  const double hi = h_values.maxCoeff();
  if (const auto* fixed = std::get_if<FixedLowerBound>(&policy)) {
    if (!(fixed->value < lo)) {
      throw InvalidParameter("fixed lower bound " + std::to_string(fixed->value) +
                             " is not below the batch minimum " + std::to_string(lo));
    }
    return fixed->value;
  }
  const auto& rel = std::get<BatchMinMinus>(policy);
  return lo - rel.delta * std::max(1.0, hi - lo);
}

Vector normalize_weights(const Vector& raw_shape) {
  if (raw_shape.size() == 0) {
    throw InvalidParameter("normalize_weights: empty input");
  }
  for (Eigen::Index i = 0; i < raw_shape.size(); ++i) {
    if (!std::isfinite(raw_shape[i]) || !(raw_shape[i] > 0.0)) {
      throw InvalidParameter("normalize_weights: entry " + std::to_string(i) +
                             " is not positive and finite");
    }
  }
  return raw_shape / raw_shape.sum();
}

WeightedValues weigh_batch(const Vector& h_values, const ShapeSpec& spec) {
  const double gamma = sample_quantile(h_values, spec.rho);
  const double h_lb = resolve_lower_bound(h_values, spec.lower_bound);
  WeightedValues out;
  out.raw_shape = shape_values(h_values, gamma, spec, h_lb);
  out.weights = normalize_weights(out.raw_shape);
  return out;
}

}  // namespace gass
