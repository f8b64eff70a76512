#pragma once

// Replicated experiments: R independent runs per (problem, algorithm), summary
// statistics per group and CSV export of the summaries and best-so-far curves.

#include "gass/benchmarks.hpp"
#include "gass/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gass {

inline constexpr double kInitialMeanRange = 30.0;   // mu_0 ~ U[-30, 30]^n
inline constexpr double kInitialVariance = 1000.0;  // Sigma_0 = 1000 I

struct ParameterOverrides {
  std::optional<double> rho;
  std::optional<double> alpha0;
  std::optional<double> alpha_exp;
  std::optional<double> epsilon;
  std::optional<double> feedback_c;
  std::optional<double> s0;
  std::optional<std::int64_t> n_per_iter;

  /// Fields set in `higher` win over fields set here.
  ParameterOverrides merged_with(const ParameterOverrides& higher) const;
};

struct ProblemSelection {
  std::string name;
  std::optional<Eigen::Index> dimension;  // reduced dimension, if any
};

struct ExperimentPlan {
  std::vector<ProblemSelection> problems;
  std::vector<Algorithm> algorithms{Algorithm::gass};
  int runs = 10;
  std::int64_t budget = 1'000'000;
  std::uint64_t base_seed = 0;
  ParameterOverrides overrides;
  std::map<std::string, ParameterOverrides> per_problem;
  unsigned workers = 1;

  void validate() const;
};

struct TrialReport {
  std::string problem;
  Algorithm algorithm = Algorithm::gass;
  Eigen::Index dimension = 0;
  int run_id = 0;
  std::uint64_t seed = 0;
  double best_value = 0.0;
  Vector best_solution;
  std::int64_t evals_used = 0;
  std::int64_t budget = 0;
  std::vector<CurvePoint> curve;
  double h_star = 0.0;
  double eps = 0.0;
  std::optional<std::string> error;
};

struct AggregateRow {
  std::string problem;
  Algorithm algorithm = Algorithm::gass;
  Eigen::Index dimension = 0;
  int runs = 0;
  std::int64_t budget = 0;
  double h_star = 0.0;
  double h_bar_star = 0.0;
  double std_err = 0.0;
  double eps = 0.0;
  int m_eps = 0;

  bool operator==(const AggregateRow&) const = default;
};

Problem resolve_problem(const ProblemSelection& selection);

/// Problem defaults, then overrides. Projection box from variances in
/// [1e-8, 1e6] and |mean| <= 10 * (half-width of the solution box).
EngineConfig make_engine_config(const Problem& problem, Algorithm algorithm, std::int64_t budget,
                                const ParameterOverrides& overrides);

/// Counter-based seed derivation; independent of how many other runs exist.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view problem, Algorithm algorithm,
                          int run_id);

TrialReport run_trial(const Problem& problem, Algorithm algorithm, int run_id,
                      const ExperimentPlan& plan);

/// Reports in (problem, algorithm, run_id) order. Failed runs carry `error`.
std::vector<TrialReport> run_experiment(const ExperimentPlan& plan);

/// Groups by (problem, dimension, algorithm). eps falls back to the value
/// stored in the reports for problems missing from `eps`.
std::vector<AggregateRow> aggregate(const std::vector<TrialReport>& reports,
                                    const std::map<std::string, double>& eps = {});

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

void export_results(const std::vector<AggregateRow>& rows,
                    const std::vector<TrialReport>& reports,
                    const std::filesystem::path& directory);

std::vector<AggregateRow> parse_results_csv(const std::filesystem::path& file);

}  // namespace gass
