#include "gass/benchmarks.hpp"
#include "gass/engine.hpp"
#include "gass/errors.hpp"
#include "gass/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace gass;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

EngineConfig basic_config(Eigen::Index n, double mean_bound = 1e3) {
  EngineConfig config;
  config.box = ProjectionBox::from_moment_bounds(n, mean_bound, 1e-8, 1e6);
  return config;
}

SampleBatch weighted(const Matrix& solutions, const Vector& weights) {
  SampleBatch b;
  b.solutions = solutions;
  b.h_values = Vector::Zero(solutions.rows());
  b.weighted = WeightedValues{weights, weights};
  return b;
}

// Textbook two-pass unbiased covariance of the rows of t.
Matrix two_pass_covariance(const Matrix& t) {
  const Eigen::RowVectorXd mean = t.colwise().mean();
  const Matrix centred = t.rowwise() - mean;
  return centred.transpose() * centred / static_cast<double>(t.rows() - 1);
}

Matrix stats_matrix(const Matrix& x) {
  Matrix t(x.rows(), 2 * x.cols());
  t << x, x.cwiseAbs2();
  return t;
}

double angle(const Vector& a, const Vector& b) {
  return (a.normalized() - b.normalized()).norm();
}

}  // namespace

TEST_CASE("schedules") {
  Schedules s;
  CHECK(s.step_size(0) == s.step_size(1));
  CHECK(s.step_size(1) == 1.0);
  CHECK(s.step_size(32) == doctest::Approx(std::pow(32.0, -0.05)));
  for (std::int64_t k = 1; k < 200; ++k) CHECK(s.step_size(k + 1) <= s.step_size(k));
  CHECK(s.sample_size(0) == 1000);
  CHECK(s.sample_size(5000) == 1000);
  s.zeta = 0.5;
  CHECK(s.sample_size(4) == 2000);
  for (std::int64_t k = 1; k < 200; ++k) CHECK(s.sample_size(k + 1) >= s.sample_size(k));
  s.alpha_exp = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
}

TEST_CASE("modified CE gain") {
  const CeGain gain;
  // 5 / 100^0.501 = 5 / 10^1.002
  CHECK(gain(0) == doctest::Approx(0.4977027086757635).epsilon(1e-12));
  CHECK(gain(1) == doctest::Approx(0.49522777709588656).epsilon(1e-12));
  CHECK(gain(1000) < gain(10));
}

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("gass") == Algorithm::gass);
  CHECK(parse_algorithm("gass-avg") == Algorithm::gass_avg);
  CHECK(parse_algorithm("gass_avg") == Algorithm::gass_avg);
  CHECK(parse_algorithm("modified-ce") == Algorithm::modified_ce);
  CHECK(parse_algorithm(to_string(Algorithm::modified_ce)) == Algorithm::modified_ce);
  CHECK_THROWS_AS(parse_algorithm("mras"), InvalidParameter);
}

TEST_CASE("estimate_Ep") {
  SUBCASE("single sample gives T(x)") {
    const Vector e = estimate_Ep(weighted(Matrix::Constant(1, 2, 3.0), vec({1.0})));
    CHECK(e == vec({3, 3, 9, 9}));
  }
  SUBCASE("two points with equal weight") {
    Matrix x(2, 1);
    x << 0, 2;
    CHECK(estimate_Ep(weighted(x, vec({0.5, 0.5}))) == vec({1, 2}));
  }
  SUBCASE("point mass on one sample") {
    Matrix x(3, 2);
    x << 1, 2, -3, 4, 5, 6;
    CHECK(estimate_Ep(weighted(x, vec({0, 1, 0}))) == vec({-3, 4, 9, 16}));
  }
  SUBCASE("missing weights") {
    SampleBatch b;
    b.solutions = Matrix::Zero(2, 1);
    b.h_values = Vector::Zero(2);
    CHECK_THROWS_AS(estimate_Ep(b), InvalidParameter);
  }
}

TEST_CASE("estimate_var_T") {
  SUBCASE("identical rows give zero") {
    SampleBatch b;
    b.solutions = Matrix::Constant(5, 3, 1.7);
    CHECK(estimate_var_T(b).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two points") {
    SampleBatch b;
    b.solutions.resize(2, 1);
    b.solutions << 0, 2;
    Matrix expected(2, 2);
    expected << 2, 4, 4, 8;
    CHECK(estimate_var_T(b) == expected);
  }
  SUBCASE("matches the two-pass covariance on random batches") {
    Rng rng(21);
    std::uniform_real_distribution<double> mean(-40, 40), logvar(-4, 7);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 1 + trial % 5, count = 2 + trial * 7;
      Vector mu(n), var(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = mean(rng);
        var[i] = std::exp(logvar(rng));
      }
      SampleBatch b;
      b.solutions = sample(from_moments(mu, var), count, rng);
      const Matrix v = estimate_var_T(b);
      const Matrix oracle = two_pass_covariance(stats_matrix(b.solutions));
      CHECK((v - v.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((v - oracle).cwiseAbs().maxCoeff() <= 1e-12 * oracle.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("needs two samples") {
    SampleBatch b;
    b.solutions = Matrix::Zero(1, 2);
    CHECK_THROWS_AS(estimate_var_T(b), InvalidParameter);
  }
}

TEST_CASE("ascent_direction") {
  const Vector e = vec({1, -2, 3, 0.5});
  CHECK(ascent_direction(Matrix::Identity(4, 4), 1e-8, e, e) == Vector::Zero(4));
  CHECK(ascent_direction(Matrix::Zero(4, 4), 1.0, e, Vector::Zero(4)) == e);

  SUBCASE("residual on random SPD systems") {
    Rng rng(31);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Index m = 2 * (1 + trial % 6);
      Matrix a(m, m);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
      const Matrix v = a * a.transpose();
      Vector ep(m), et(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        ep[i] = z(rng);
        et[i] = z(rng);
      }
      const double eps = 1e-3;
      const Vector d = ascent_direction(v, eps, ep, et);
      const Vector rhs = ep - et;
      const Matrix reg = v + eps * Matrix::Identity(m, m);
      CHECK((reg * d - rhs).norm() <= 1e-10 * rhs.norm());
    }
  }
  SUBCASE("indefinite preconditioner is an error") {
    CHECK_THROWS_AS(ascent_direction(-1e3 * Matrix::Identity(2, 2), 1e-8, e.head(2), Vector::Zero(2)),
                    NumericalError);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(ascent_direction(Matrix::Identity(3, 3), 1e-8, e, e), InvalidParameter);
  }
}

TEST_CASE("project") {
  const ProjectionBox box = ProjectionBox::from_moment_bounds(2, 10.0, 0.01, 100.0);
  const NaturalParam inside = from_moments(vec({1, -2}), vec({1, 3}));
  CHECK(box.contains(inside));
  CHECK(project(inside, box).stacked() == inside.stacked());

  NaturalParam outside = inside;
  outside.linear[0] = 1e9;
  outside.quadratic[1] = -1e-9;
  const NaturalParam p = project(outside, box);
  CHECK(p.linear[0] == box.upper[0]);
  CHECK(p.quadratic[1] == box.upper[3]);
  CHECK(p.linear[1] == inside.linear[1]);
  CHECK(box.contains(p));

  Rng rng(2);
  std::normal_distribution<double> z(0, 1e4);
  for (int i = 0; i < 200; ++i) {
    Vector v(4);
    for (Eigen::Index j = 0; j < 4; ++j) v[j] = z(rng);
    const NaturalParam once = project(NaturalParam::from_stacked(v), box);
    CHECK(project(once, box).stacked() == once.stacked());
  }
}

TEST_CASE("projection box validation") {
  ProjectionBox box = ProjectionBox::from_moment_bounds(1, 1.0, 1e-8, 1e6);
  CHECK_NOTHROW(box.validate(1));
  CHECK_THROWS_AS(box.validate(2), InvalidParameter);
  box.upper[1] = 0.0;
  CHECK_THROWS_AS(box.validate(1), InvalidParameter);
  CHECK_THROWS_AS(ProjectionBox::from_moment_bounds(1, 1.0, 1.0, 1.0), InvalidParameter);
}

TEST_CASE("running average") {
  Vector avg = vec({1});
  avg = running_average(avg, vec({3}), 2);
  CHECK(avg[0] == 2.0);

  Rng rng(17);
  std::normal_distribution<double> z(0, 50);
  Vector bar = Vector::Zero(3), sum = Vector::Zero(3);
  for (std::int64_t k = 1; k <= 10'000; ++k) {
    Vector theta(3);
    for (Eigen::Index i = 0; i < 3; ++i) theta[i] = z(rng);
    bar = running_average(bar, theta, k);
    sum += theta;
  }
  CHECK((bar - sum / 10'000.0).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK_THROWS_AS(running_average(bar, bar, 0), InvalidParameter);
}

TEST_CASE("symmetric batch leaves theta unchanged") {
  const EngineConfig config = basic_config(1);
  const NaturalParam theta = from_moments(vec({0}), vec({1}));
  Matrix x(2, 1);
  x << -1, 1;
  const SampleBatch batch = weighted(x, vec({0.5, 0.5}));
  CHECK(modified_ce_direction(batch, theta) == Vector::Zero(2));
  CHECK(gass_update(theta, theta, batch, 1.0, 0.0, config).stacked() == theta.stacked());
  CHECK(modified_ce_update(theta, batch, 0.5, config.box).stacked() == theta.stacked());
}

TEST_CASE("zero step size leaves theta unchanged") {
  const EngineConfig config = basic_config(2);
  const NaturalParam theta = from_moments(vec({0.5, -1}), vec({2, 3}));
  Rng rng(4);
  SampleBatch batch;
  batch.solutions = sample(theta, 200, rng);
  batch.h_values = -batch.solutions.rowwise().squaredNorm();
  batch.weighted = weigh_batch(batch.h_values, config.shape);
  CHECK(gass_update(theta, theta, batch, 0.0, 0.0, config).stacked() == theta.stacked());
  CHECK(modified_ce_update(theta, batch, 0.0, config.box).stacked() == theta.stacked());
}

TEST_CASE("feedback term vanishes when theta_bar equals theta") {
  EngineConfig config = basic_config(2);
  config.feedback_c = 0.5;
  const Objective h = [](const Vector& x) { return -x.squaredNorm(); };
  const EngineState s0 = initial_state(vec({3, -4}), vec({10, 10}), config.box);
  Rng a(8), b(8);
  const EngineState plain = step_gass(s0, h, config, a);
  const EngineState avg = step_gass_avg(s0, h, config, b);
  CHECK(plain.theta.stacked() == avg.theta.stacked());

  // theta_bar_1 = theta_1, so the second step agrees too; after it theta_bar
  // is (theta_1 + theta_2)/2 and the third step differs.
  const EngineState plain2 = step_gass(plain, h, config, a);
  const EngineState avg2 = step_gass_avg(avg, h, config, b);
  CHECK(plain2.theta.stacked() == avg2.theta.stacked());
  CHECK(avg2.theta_bar.stacked() != avg2.theta.stacked());
  const EngineState plain3 = step_gass(plain2, h, config, a);
  const EngineState avg3 = step_gass_avg(avg2, h, config, b);
  CHECK(plain3.theta.stacked() != avg3.theta.stacked());
}

TEST_CASE("GASS_avg with c = 0 reproduces GASS") {
  const Problem p = reduced_dimension(get_problem("griewank"), 3);
  EngineConfig gass = make_engine_config(p, Algorithm::gass, 60'000, {});
  EngineConfig avg = make_engine_config(p, Algorithm::gass_avg, 60'000, {});
  avg.feedback_c = 0.0;
  const Vector mu0 = vec({12, -7, 20});
  const Vector var0 = Vector::Constant(3, 1000.0);
  const RunResult r1 = run(gass, p.evaluate, mu0, var0, 99);
  const RunResult r2 = run(avg, p.evaluate, mu0, var0, 99);
  REQUIRE(r1.curve.size() == r2.curve.size());
  for (std::size_t i = 0; i < r1.curve.size(); ++i) {
    CHECK(r1.curve[i].best_so_far == r2.curve[i].best_so_far);
  }
  CHECK(r1.final_theta.stacked() == r2.final_theta.stacked());
  CHECK(r1.best_solution == r2.best_solution);
}

TEST_CASE("modified CE direction is the GASS direction without preconditioner") {
  Rng rng(5);
  const NaturalParam theta = from_moments(vec({20, -5, 7}), vec({1000, 1000, 1000}));
  EngineConfig config = basic_config(3);
  SampleBatch batch;
  batch.solutions = sample(theta, 1000, rng);
  batch.h_values = -(batch.solutions.array() - 1.0).matrix().rowwise().squaredNorm();
  batch.weighted = weigh_batch(batch.h_values, config.shape);

  const Vector ce = modified_ce_direction(batch, theta);
  const Vector identity =
      ascent_direction(Matrix::Zero(6, 6), 1.0, estimate_Ep(batch), expected_T(theta).stacked());
  CHECK(angle(ce, identity) <= 1e-10);

  // Large epsilon: (V + eps I)^{-1} r -> r / eps.
  config.epsilon = 1e20;
  const Vector wide = gass_direction(batch, theta, config);
  CHECK(angle(ce, wide) <= 1e-10);
  config.epsilon = 1e-8;
  CHECK(angle(ce, gass_direction(batch, theta, config)) > 1e-3);
}

TEST_CASE("direction is unchanged by scaling the shape values") {
  Rng rng(13);
  const NaturalParam theta = from_moments(vec({1, 2}), vec({4, 9}));
  const EngineConfig config = basic_config(2);
  SampleBatch batch;
  batch.solutions = sample(theta, 500, rng);
  batch.h_values = -batch.solutions.rowwise().squaredNorm();
  batch.weighted = weigh_batch(batch.h_values, config.shape);
  const Vector d = gass_direction(batch, theta, config);
  for (double c : {1e-3, 7.0, 1e4}) {
    SampleBatch scaled = batch;
    scaled.weighted->raw_shape *= c;
    scaled.weighted->weights = normalize_weights(scaled.weighted->raw_shape);
    const Vector ds = gass_direction(scaled, theta, config);
    CHECK((ds - d).norm() <= 1e-10 * d.norm());
  }
}

TEST_CASE("one GASS step from a wide start improves the mean Dejong objective") {
  const Problem p = get_problem("dejong5");
  const EngineConfig config = make_engine_config(p, Algorithm::gass, 1'000'000, {});
  Rng common_rng(2718);
  const Matrix z = standard_normals(20'000, 2, common_rng);
  auto mean_objective = [&](const NaturalParam& theta) {
    return evaluate_batch(p, transform_normals(theta, z)).mean();
  };

  int improved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EngineState s0 = initial_state(vec({20, 20}), vec({1000, 1000}), config.box);
    Rng rng(seed);
    const EngineState s1 = step_gass(s0, p.evaluate, config, rng);
    if (mean_objective(s1.theta) > mean_objective(s0.theta)) ++improved;
  }
  CHECK(improved >= 95);
}

TEST_CASE("step invariants along a run") {
  const Problem p = reduced_dimension(get_problem("rastrigin"), 4);
  for (Algorithm algo : {Algorithm::gass, Algorithm::gass_avg, Algorithm::modified_ce}) {
    CAPTURE(to_string(algo));
    EngineConfig config = make_engine_config(p, algo, 1'000'000, {});
    EngineState state = initial_state(vec({25, -25, 10, 3}), Vector::Constant(4, 1000.0), config.box);
    Rng rng(3);
    Vector theta_sum = Vector::Zero(8);
    for (int k = 1; k <= 60; ++k) {
      const EngineState next = step(state, p.evaluate, config, rng);
      CHECK(next.iteration == k);
      CHECK(next.evals_used == state.evals_used + config.schedules.sample_size(state.iteration));
      CHECK(next.best_value >= state.best_value);
      CHECK(config.box.contains(next.theta));
      theta_sum += next.theta.stacked();
      const Vector direct = theta_sum / static_cast<double>(k);
      CHECK((next.theta_bar.stacked() - direct).cwiseAbs().maxCoeff() <=
            1e-9 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
      state = next;
    }
  }
}

TEST_CASE("run") {
  const Problem sphere2 = reduced_dimension(get_problem("sphere"), 2);

  SUBCASE("budget below one batch fails before evaluating") {
    EngineConfig config = make_engine_config(sphere2, Algorithm::gass, 999, {});
    int calls = 0;
    const Objective counting = [&](const Vector& x) {
      ++calls;
      return sphere2.evaluate(x);
    };
    CHECK_THROWS_AS(run(config, counting, vec({1, 1}), vec({1, 1}), 0), InvalidParameter);
    CHECK(calls == 0);
  }
  SUBCASE("zero variance at the optimum finds H* in the first batch") {
    const EngineConfig config = make_engine_config(sphere2, Algorithm::gass, 1000, {});
    const RunResult r = run(config, sphere2.evaluate, sphere2.optimizer, Vector::Zero(2), 1);
    REQUIRE(r.curve.size() == 1);
    CHECK(std::abs(r.curve[0].best_so_far - sphere2.optimum_value) <= 1e-6);
  }
  SUBCASE("budget is respected and the curve is complete") {
    const EngineConfig config = make_engine_config(sphere2, Algorithm::gass, 10'500, {});
    const RunResult r = run(config, sphere2.evaluate, vec({5, 5}), vec({1000, 1000}), 2);
    CHECK(r.evals_used == 10'000);
    CHECK(r.iterations == 10);
    REQUIRE(r.curve.size() == 10);
    CHECK(r.curve.back().cum_evals == 10'000);
    CHECK(r.curve.back().best_so_far == r.best_value);
    CHECK(sphere2.evaluate(r.best_solution) == r.best_value);
    for (std::size_t i = 1; i < r.curve.size(); ++i) {
      CHECK(r.curve[i].best_so_far >= r.curve[i - 1].best_so_far);
    }
  }
  SUBCASE("same seed gives bit-identical results") {
    const EngineConfig config = make_engine_config(sphere2, Algorithm::gass_avg, 20'000, {});
    const RunResult a = run(config, sphere2.evaluate, vec({5, 5}), vec({1000, 1000}), 77);
    const RunResult b = run(config, sphere2.evaluate, vec({5, 5}), vec({1000, 1000}), 77);
    const RunResult c = run(config, sphere2.evaluate, vec({5, 5}), vec({1000, 1000}), 78);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      CHECK(a.curve[i].best_so_far == b.curve[i].best_so_far);
    }
    CHECK(a.final_theta.stacked() == b.final_theta.stacked());
    CHECK(a.final_theta.stacked() != c.final_theta.stacked());
  }
  SUBCASE("non-finite objective identifies the point") {
    const EngineConfig config = make_engine_config(sphere2, Algorithm::gass, 5000, {});
    const Objective bad = [](const Vector& x) { return x[0] > 0 ? NAN : -x.squaredNorm(); };
    try {
      run(config, bad, vec({0, 0}), vec({1, 1}), 3);
      FAIL("expected ObjectiveError");
    } catch (const ObjectiveError& e) {
      CHECK(std::string(e.what()).find("x = [") != std::string::npos);
    }
  }
}

TEST_CASE("sphere n=10 reaches -1 within 300 iterations") {
  const Problem p = reduced_dimension(get_problem("sphere"), 10);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EngineConfig config = make_engine_config(p, Algorithm::gass, 300'000, {});
    Rng init(seed);
    std::uniform_real_distribution<double> u(-kInitialMeanRange, kInitialMeanRange);
    Vector mu0(10);
    for (Eigen::Index i = 0; i < 10; ++i) mu0[i] = u(init);
    const RunResult r = run(config, p.evaluate, mu0, Vector::Constant(10, kInitialVariance), seed);
    CHECK(r.iterations == 300);
    total += r.best_value;
  }
  CHECK(std::abs(total / 5.0 - p.optimum_value) <= 1e-3);
}
