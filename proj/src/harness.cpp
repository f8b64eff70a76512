#include "gass/harness.hpp"

#include "gass/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

namespace gass {

ParameterOverrides ParameterOverrides::merged_with(const ParameterOverrides& higher) const {
  ParameterOverrides out = *this;
  if (higher.rho) out.rho = higher.rho;
  if (higher.alpha0) out.alpha0 = higher.alpha0;
  if (higher.alpha_exp) out.alpha_exp = higher.alpha_exp;
  if (higher.epsilon) out.epsilon = higher.epsilon;
  if (higher.feedback_c) out.feedback_c = higher.feedback_c;
  if (higher.s0) out.s0 = higher.s0;
  if (higher.n_per_iter) out.n_per_iter = higher.n_per_iter;
  return out;
}

void ExperimentPlan::validate() const {
  if (runs < 1) throw InvalidParameter("runs must be at least 1");
  if (problems.empty()) throw InvalidParameter("experiment plan has no problems");
  if (algorithms.empty()) throw InvalidParameter("experiment plan has no algorithms");
  for (const auto& sel : problems) {
    const Problem p = resolve_problem(sel);
    for (Algorithm a : algorithms) {
      auto it = per_problem.find(p.name);
      const ParameterOverrides o =
          it == per_problem.end() ? overrides : overrides.merged_with(it->second);
      make_engine_config(p, a, budget, o).validate(p.dimension);
    }
  }
}

Problem resolve_problem(const ProblemSelection& selection) {
  Problem p = get_problem(selection.name);
  if (selection.dimension && *selection.dimension != p.dimension) {
    p = reduced_dimension(p, *selection.dimension);
  }
  return p;
}

EngineConfig make_engine_config(const Problem& problem, Algorithm algorithm, std::int64_t budget,
                                const ParameterOverrides& overrides) {
  EngineConfig cfg;
  cfg.algorithm = algorithm;
  cfg.budget = budget;
  cfg.shape.rho = overrides.rho.value_or(problem.defaults.rho);
  cfg.shape.s0 = overrides.s0.value_or(1e5);
  cfg.shape.lower_bound = BatchMinMinus{0.01};
  cfg.schedules.alpha0 = overrides.alpha0.value_or(problem.defaults.alpha0);
  cfg.schedules.alpha_exp = overrides.alpha_exp.value_or(0.05);
  cfg.schedules.n0 = overrides.n_per_iter.value_or(1000);
  cfg.schedules.zeta = 0.0;
  cfg.epsilon = overrides.epsilon.value_or(1e-8);
  cfg.feedback_c = overrides.feedback_c.value_or(problem.defaults.feedback_c);
  const double radius = std::max(std::abs(problem.box_lo), std::abs(problem.box_hi));
  cfg.box = ProjectionBox::from_moment_bounds(problem.dimension, 10.0 * radius, 1e-8, 1e6);
  return cfg;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view problem, Algorithm algorithm,
                          int run_id) {
  std::uint64_t label = fnv1a(problem);
  label = fnv1a("/", label);
  label = fnv1a(to_string(algorithm), label);
  std::uint64_t s = splitmix64(base_seed ^ splitmix64(label));
  return splitmix64(s + static_cast<std::uint64_t>(run_id));
}

TrialReport run_trial(const Problem& problem, Algorithm algorithm, int run_id,
                      const ExperimentPlan& plan) {
  TrialReport rep;
  rep.problem = problem.name;
  rep.algorithm = algorithm;
  rep.dimension = problem.dimension;
  rep.run_id = run_id;
  rep.budget = plan.budget;
  rep.h_star = problem.optimum_value;
  rep.eps = problem.defaults.eps_tolerance;
  rep.seed = derive_seed(plan.base_seed, problem.name, algorithm, run_id);
  rep.best_value = std::numeric_limits<double>::quiet_NaN();

  try {
    auto it = plan.per_problem.find(problem.name);
    const ParameterOverrides o =
        it == plan.per_problem.end() ? plan.overrides : plan.overrides.merged_with(it->second);
    const EngineConfig cfg = make_engine_config(problem, algorithm, plan.budget, o);

    Rng rng(rep.seed);
    std::uniform_real_distribution<double> init(-kInitialMeanRange, kInitialMeanRange);
    Vector mean0(problem.dimension);
    for (Eigen::Index i = 0; i < mean0.size(); ++i) mean0[i] = init(rng);
    const Vector var0 = Vector::Constant(problem.dimension, kInitialVariance);
    const std::uint64_t engine_seed = rng();

    RunResult res = run(cfg, problem.evaluate, mean0, var0, engine_seed);
    rep.best_value = res.best_value;
    rep.best_solution = std::move(res.best_solution);
    rep.evals_used = res.evals_used;
    rep.curve = std::move(res.curve);
  } catch (const std::exception& e) {
    rep.error = e.what();
  }
  return rep;
}

std::vector<TrialReport> run_experiment(const ExperimentPlan& plan) {
  plan.validate();

  struct Job {
    Problem problem;
    Algorithm algorithm;
    int run_id;
  };
  std::vector<Job> jobs;
  for (const auto& sel : plan.problems) {
    const Problem p = resolve_problem(sel);
    for (Algorithm a : plan.algorithms) {
      for (int r = 0; r < plan.runs; ++r) jobs.push_back(Job{p, a, r});
    }
  }

  std::vector<TrialReport> reports(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      reports[i] = run_trial(jobs[i].problem, jobs[i].algorithm, jobs[i].run_id, plan);
    }
  };
  const unsigned count = std::clamp<unsigned>(plan.workers, 1, std::max<std::size_t>(1, jobs.size()));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  return reports;
}

namespace {

auto group_key(const TrialReport& r) { return std::make_tuple(r.problem, r.dimension, r.algorithm); }

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<TrialReport>& reports,
                                    const std::map<std::string, double>& eps) {
  using Key = decltype(group_key(reports.front()));
  std::map<Key, std::vector<const TrialReport*>> groups;
  for (const auto& r : reports) groups[group_key(r)].push_back(&r);

  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    const TrialReport& first = *members.front();
    AggregateRow row;
    row.problem = first.problem;
    row.algorithm = first.algorithm;
    row.dimension = first.dimension;
    row.runs = static_cast<int>(members.size());
    row.budget = first.budget;
    row.h_star = first.h_star;
    auto it = eps.find(first.problem);
    row.eps = it != eps.end() ? it->second : first.eps;

    std::vector<double> values;
    for (const TrialReport* r : members) {
      if (r->error) continue;
      values.push_back(r->best_value);
      if (row.h_star - r->best_value <= row.eps) ++row.m_eps;
    }
    if (values.empty()) {
      row.h_bar_star = std::numeric_limits<double>::quiet_NaN();
      row.std_err = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double n = static_cast<double>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.h_bar_star = mean;
      row.std_err = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw std::runtime_error("write to " + file.string() + " failed");
}

}  // namespace

void export_results(const std::vector<AggregateRow>& rows,
                    const std::vector<TrialReport>& reports,
                    const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + directory.string() + ": " + ec.message());
  }

  std::vector<const AggregateRow*> sorted_rows;
  for (const auto& r : rows) sorted_rows.push_back(&r);
  std::stable_sort(sorted_rows.begin(), sorted_rows.end(), [](auto* a, auto* b) {
    return std::tie(a->problem, a->dimension, a->algorithm) <
           std::tie(b->problem, b->dimension, b->algorithm);
  });

  const auto results_path = directory / "results.csv";
  auto results = open_for_write(results_path);
  results << "problem,algorithm,dimension,runs,budget,H_star,H_bar_star,std_err,eps,M_eps\n";
  for (const AggregateRow* r : sorted_rows) {
    results << r->problem << ',' << to_string(r->algorithm) << ',' << r->dimension << ','
            << r->runs << ',' << r->budget << ',' << format_double(r->h_star) << ','
            << format_double(r->h_bar_star) << ',' << format_double(r->std_err) << ','
            << format_double(r->eps) << ',' << r->m_eps << '\n';
  }
  finish(results, results_path);

  std::vector<const TrialReport*> sorted_reports;
  for (const auto& r : reports) sorted_reports.push_back(&r);
  std::stable_sort(sorted_reports.begin(), sorted_reports.end(), [](auto* a, auto* b) {
    return std::tie(a->problem, a->dimension, a->algorithm, a->run_id) <
           std::tie(b->problem, b->dimension, b->algorithm, b->run_id);
  });

  const auto curves_path = directory / "curves.csv";
  auto curves = open_for_write(curves_path);
  curves << "problem,algorithm,run_id,seed,cum_evals,best_so_far\n";
  for (const TrialReport* r : sorted_reports) {
    for (const auto& pt : r->curve) {
      curves << r->problem << ',' << to_string(r->algorithm) << ',' << r->run_id << ',' << r->seed
             << ',' << pt.cum_evals << ',' << format_double(pt.best_so_far) << '\n';
    }
  }
  finish(curves, curves_path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
T parse_number(const std::string& s, const std::filesystem::path& file) {
  if constexpr (std::is_floating_point_v<T>) {
    if (s == "nan") return std::numeric_limits<T>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<T>::infinity();
    if (s == "-inf") return -std::numeric_limits<T>::infinity();
  }
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error(file.string() + ": cannot parse number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<AggregateRow> parse_results_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": missing header");
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) {
      throw std::runtime_error(file.string() + ": expected 10 fields, got " +
                               std::to_string(f.size()));
    }
    AggregateRow r;
    r.problem = f[0];
    r.algorithm = parse_algorithm(f[1]);
    r.dimension = parse_number<Eigen::Index>(f[2], file);
    r.runs = parse_number<int>(f[3], file);
    r.budget = parse_number<std::int64_t>(f[4], file);
    r.h_star = parse_number<double>(f[5], file);
    r.h_bar_star = parse_number<double>(f[6], file);
    r.std_err = parse_number<double>(f[7], file);
    r.eps = parse_number<double>(f[8], file);
    r.m_eps = parse_number<int>(f[9], file);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace gass
