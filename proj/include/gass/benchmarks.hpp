#pragma once

// The ten maximization test problems. Minimization benchmarks enter negated,
// and most carry a "-1" offset so that H* = -1.

#include "gass/gaussian.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace gass {

struct ProblemDefaults {
  double rho = 0.05;
  double alpha0 = 1.0;
  double feedback_c = 0.1;
  double eps_tolerance = 1e-3;  // for counting epsilon-optimal runs
};

struct Problem {
  std::string name;   // stable identifier, e.g. "griewank"
  std::string label;  // e.g. "H5 Griewank"
  Eigen::Index dimension = 0;
  double box_lo = 0.0;  // same interval for every coordinate
  double box_hi = 0.0;
  std::function<double(const Vector&)> evaluate;
  double optimum_value = 0.0;  // H(x*) at the stored optimizer
  Vector optimizer;
  double reported_optimum = 0.0;  // published value; approximate for dejong5 and shekel
  ProblemDefaults defaults;
  bool dimension_generic = true;
  Eigen::Index min_dimension = 1;
};

namespace functions {

double dejong5(const Vector& x);
double shekel(const Vector& x);
double powel(const Vector& x);
double rosenbrock(const Vector& x);
double griewank(const Vector& x);
double trigonometric(const Vector& x);
double rastrigin(const Vector& x);
double pinter(const Vector& x);
double levy(const Vector& x);
double sphere(const Vector& x);

/// Row 0: a_{j1}, row 1: a_{j2}.
const std::array<std::array<double, 25>, 2>& dejong_a();

}  // namespace functions

const std::vector<std::string>& problem_names();

/// Throws InvalidParameter listing the valid names if `name` is unknown.
Problem get_problem(std::string_view name);

Vector evaluate_batch(const Problem& problem, const Matrix& solutions);

/// Same formula at dimension n (dejong5 and shekel are fixed-size).
Problem reduced_dimension(const Problem& problem, Eigen::Index n);

}  // namespace gass
