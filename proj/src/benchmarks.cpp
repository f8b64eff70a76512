#include "gass/benchmarks.hpp"

#include "gass/errors.hpp"

#include <cmath>
#include <numbers>

namespace gass {

namespace functions {

namespace {

constexpr double pi = std::numbers::pi;

double sq(double v) { return v * v; }

void require_dim(const Vector& x, Eigen::Index min, const char* name) {
  if (x.size() < min) {
    throw InvalidParameter(std::string(name) + " needs at least " + std::to_string(min) +
                           " coordinates");
  }
}

}  // namespace

const std::array<std::array<double, 25>, 2>& dejong_a() {
  static const std::array<std::array<double, 25>, 2> a{{
      {-32, -16, 0, 16, 32, -32, -16, 0, 16, 32, -32, -16, 0,
       16,  32,  -32, -16, 0, 16, 32, -32, -16, 0, 16, 32},
      {-32, -32, -32, -32, -32, -16, -16, -16, -16, -16, 0,  0,  0,
       0,   0,   16,  16,  16,  16,  16,  32,  32,  32,  32,  32},
  }};
  return a;
}

double dejong5(const Vector& x) {
  require_dim(x, 2, "dejong5");
  const auto& a = dejong_a();
  double sum = 0.002;
  for (int j = 0; j < 25; ++j) {
    const double d1 = x[0] - a[0][j];
    const double d2 = x[1] - a[1][j];
    const double d1_3 = d1 * d1 * d1;
    const double d2_3 = d2 * d2 * d2;
    sum += 1.0 / ((j + 1) + d1_3 * d1_3 + d2_3 * d2_3);
  }
  return -1.0 / sum;
}

double shekel(const Vector& x) {
  require_dim(x, 4, "shekel");
  static constexpr double a[5][4] = {
      {4, 4, 4, 4}, {1, 1, 1, 1}, {8, 8, 8, 8}, {6, 6, 6, 6}, {3, 7, 3, 7}};
  static constexpr double c[5] = {0.1, 0.2, 0.2, 0.4, 0.4};
  double h = 0.0;
  for (int i = 0; i < 5; ++i) {
    double d = c[i];
    for (int k = 0; k < 4; ++k) d += sq(x[k] - a[i][k]);
    h += 1.0 / d;
  }
  return h;
}

// Sum over i = 2..n-2 (1-based) exactly as printed; terms use x_{i-1}..x_{i+2}.
double powel(const Vector& x) {
  require_dim(x, 4, "powel");
  const Eigen::Index n = x.size();
  double s = 0.0;
  for (Eigen::Index j = 1; j <= n - 3; ++j) {
    const double xm = x[j - 1], x0 = x[j], x1 = x[j + 1], x2 = x[j + 2];
    s += sq(xm + 10.0 * x0) + 5.0 * sq(x1 - x2) + sq(sq(x0 - 2.0 * x1)) + 10.0 * sq(sq(xm - x2));
  }
  return -s - 1.0;
}

double rosenbrock(const Vector& x) {
  require_dim(x, 2, "rosenbrock");
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    s += 100.0 * sq(x[i + 1] - x[i] * x[i]) + sq(x[i] - 1.0);
  }
  return -s - 1.0;
}

double griewank(const Vector& x) {
  double s = 0.0;
  double p = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += x[i] * x[i];
    p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return -s / 4000.0 + p - 1.0;
}

double trigonometric(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d2 = sq(x[i] - 0.9);
    s += 8.0 * sq(std::sin(7.0 * d2)) + 6.0 * sq(std::sin(14.0 * d2)) + d2;
  }
  return -s - 1.0;
}

double rastrigin(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += x[i] * x[i] - 10.0 * std::cos(2.0 * pi * x[i]);
  }
  return -s - 10.0 * static_cast<double>(x.size()) - 1.0;
}

// Boundary terms wrap around: x_0 = x_n and x_{n+1} = x_1.
double pinter(const Vector& x) {
  require_dim(x, 2, "pinter");
  const Eigen::Index n = x.size();
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double i = static_cast<double>(j + 1);
    const double prev = x[(j + n - 1) % n];
    const double cur = x[j];
    const double next = x[(j + 1) % n];
    s1 += i * cur * cur;
    s2 += 20.0 * i * sq(std::sin(prev * std::sin(cur) - cur + std::sin(next)));
    s3 += i * std::log10(1.0 + i * sq(prev * prev - 2.0 * cur + 3.0 * next - std::cos(cur) + 1.0));
  }
  return -(s1 + s2 + s3) - 1.0;
}

// The inner term is sin^2(pi y_i + 1) as printed, not the textbook sin^2(pi y_{i+1}).
double levy(const Vector& x) {
  const Eigen::Index n = x.size();
  const auto y = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  double s = sq(std::sin(pi * y(0)));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double yi = y(i);
    s += sq(yi - 1.0) * (1.0 + 10.0 * sq(std::sin(pi * yi + 1.0)));
  }
  const double yn = y(n - 1);
  s += sq(yn - 1.0) * (1.0 + 10.0 * sq(std::sin(2.0 * pi * yn)));
  return -s - 1.0;
}

double sphere(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += static_cast<double>(i + 1) * x[i] * x[i];
  }
  return -s - 1.0;
}

}  // namespace functions

namespace {

struct Entry {
  const char* name;
  const char* label;
  Eigen::Index dimension;
  double lo, hi;
  double (*fn)(const Vector&);
  double optimizer_coord;  // constant-coordinate optimizer
  double optimum;
  ProblemDefaults defaults;
  bool generic;
  Eigen::Index min_dimension;
};

// Defaults: rho 0.02 for the two low-dimensional problems; alpha0 0.3 for
// those and Rosenbrock; c 0.002 for Powel, Rosenbrock and Pinter; epsilon 1e-2
// for Rosenbrock, Rastrigin and Pinter.
const std::array<Entry, 10>& registry() {
  static const std::array<Entry, 10> entries{{
      {"dejong5", "H1 Dejong 5th", 2, -50, 50, functions::dejong5, -32, -0.998,
       {0.02, 0.3, 0.1, 1e-3}, false, 2},
      {"shekel", "H2 Shekel", 4, 0, 10, functions::shekel, 4, 10.153, {0.02, 0.3, 0.1, 1e-3}, false,
       4},
      {"powel", "H3 Powel singular", 50, -50, 50, functions::powel, 0, -1, {0.05, 1.0, 0.002, 1e-3},
       true, 4},
      {"rosenbrock", "H4 Rosenbrock", 10, -10, 10, functions::rosenbrock, 1, -1,
       {0.05, 0.3, 0.002, 1e-2}, true, 2},
      {"griewank", "H5 Griewank", 50, -50, 50, functions::griewank, 0, 0, {0.05, 1.0, 0.1, 1e-3},
       true, 1},
      {"trigonometric", "H6 Trigonometric", 50, -50, 50, functions::trigonometric, 0.9, -1,
       {0.05, 1.0, 0.1, 1e-3}, true, 1},
      {"rastrigin", "H7 Rastrigin", 20, -5.12, 5.12, functions::rastrigin, 0, -1,
       {0.05, 1.0, 0.1, 1e-2}, true, 1},
      {"pinter", "H8 Pinter", 50, -50, 50, functions::pinter, 0, -1, {0.05, 1.0, 0.002, 1e-2}, true,
       2},
      {"levy", "H9 Levy", 50, -50, 50, functions::levy, 1, -1, {0.05, 1.0, 0.1, 1e-3}, true, 1},
      {"sphere", "H10 Weighted sphere", 50, -50, 50, functions::sphere, 0, -1,
       {0.05, 1.0, 0.1, 1e-3}, true, 1},
  }};
  return entries;
}

Problem build(const Entry& e, Eigen::Index n) {
  Problem p;
  p.name = e.name;
  p.label = e.label;
  p.dimension = n;
  p.box_lo = e.lo;
  p.box_hi = e.hi;
  p.evaluate = e.fn;
  p.optimizer = Vector::Constant(n, e.optimizer_coord);
  p.reported_optimum = e.optimum;
  p.defaults = e.defaults;
  p.dimension_generic = e.generic;
  p.min_dimension = e.min_dimension;
  if (p.name == "shekel") {
    // Stationary point next to the published (4,4,4,4), which is not itself
    // a critical point of the function.
    p.optimizer << 4.0000371528196762307, 4.00013327659156009, 4.0000371528196762307,
        4.00013327659156009;
  }
  p.optimum_value = e.generic ? e.optimum : e.fn(p.optimizer);
  return p;
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

Problem get_problem(std::string_view name) {
  for (const auto& e : registry()) {
    if (name == e.name) return build(e, e.dimension);
  }
  std::string valid;
  for (const auto& n : problem_names()) {
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw InvalidParameter("unknown problem '" + std::string(name) + "' (valid: " + valid + ")");
}

Vector evaluate_batch(const Problem& problem, const Matrix& solutions) {
  if (solutions.cols() != problem.dimension) {
    throw InvalidParameter(problem.name + ": expected " + std::to_string(problem.dimension) +
                           " columns, got " + std::to_string(solutions.cols()));
  }
  Vector out(solutions.rows());
  Vector x(problem.dimension);
  for (Eigen::Index i = 0; i < solutions.rows(); ++i) {
    x = solutions.row(i).transpose();
    out[i] = problem.evaluate(x);
  }
  return out;
}

Problem reduced_dimension(const Problem& problem, Eigen::Index n) {
  if (!problem.dimension_generic) {
    throw InvalidParameter(problem.name + " has a fixed dimension and cannot be resized");
  }
  if (n < problem.min_dimension) {
    throw InvalidParameter(problem.name + " needs dimension >= " +
                           std::to_string(problem.min_dimension));
  }
  for (const auto& e : registry()) {
    if (problem.name == e.name) return build(e, n);
  }
  throw InvalidParameter("unknown problem '" + problem.name + "'");
}

}  // namespace gass
