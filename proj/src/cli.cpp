#include "gass/cli.hpp"

#include "gass/diagnostics.hpp"
#include "gass/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace gass::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Only dimension-generic problems follow --dim in a suite.
bool resizable(const std::string& name) { return get_problem(name).dimension_generic; }

}  // namespace

ParseResult parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-based adaptive stochastic search for black-box maximization", "gass"};
  app.require_subcommand(1, 1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Flat key = value file; keys are the long flag names");

  CliConfig cfg;
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());

  std::string problem, problems, algo, algos;
  std::optional<Eigen::Index> dim;
  std::optional<int> runs;
  std::optional<std::int64_t> budget;
  std::optional<std::string> out_dir;
  auto& ov = cfg.overrides;

  app.add_option("--problem", problem, "Problem name (run)");
  app.add_option("--problems", problems, "Comma-separated problem names (suite)");
  app.add_option("--algo", algo, "gass, gass-avg or modified-ce (run)");
  app.add_option("--algos", algos, "Comma-separated algorithms (suite)");
  app.add_option("--dim", dim, "Reduced dimension for dimension-generic problems")
      ->check(CLI::PositiveNumber);
  app.add_option("--runs", runs, "Independent runs per problem and algorithm")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", budget, "Function evaluations per run")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Base seed");
  app.add_option("--out", out_dir, "Output directory for CSV files")->envname("GASS_OUTPUT_DIR");
  app.add_option("--workers", cfg.workers, "Concurrent runs")->check(CLI::PositiveNumber);
  app.add_flag("--full-scale", cfg.full_scale,
               "Native dimensions and 100 runs unless --dim/--runs are given");

  app.add_option("--rho", ov.rho, "Quantile parameter")->check(CLI::Range(0.0, 1.0));
  app.add_option("--alpha0", ov.alpha0, "Initial step size")->check(CLI::PositiveNumber);
  app.add_option("--alpha", ov.alpha_exp, "Step-size decay exponent")->check(CLI::Range(0.0, 1.0));
  app.add_option("--epsilon", ov.epsilon, "Preconditioner regularizer")->check(CLI::PositiveNumber);
  app.add_option("--c", ov.feedback_c, "Averaging feedback weight")->check(CLI::NonNegativeNumber);
  app.add_option("--s0", ov.s0, "Shape-function sharpness")->check(CLI::PositiveNumber);
  app.add_option("--n-per-iter", ov.n_per_iter, "Samples per iteration")->check(CLI::Range(2, 1 << 30));

  auto* run_cmd = app.add_subcommand("run", "Optimize one problem once");
  auto* suite_cmd = app.add_subcommand("suite", "Replicated experiment with CSV export");
  auto* check_cmd = app.add_subcommand("check", "Numerical self-check of the estimators");
  auto* list_cmd = app.add_subcommand("list", "List the benchmark problems");
  for (auto* sub : {run_cmd, suite_cmd, check_cmd, list_cmd}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);

    if (*run_cmd) cfg.command = Command::run;
    if (*suite_cmd) cfg.command = Command::suite;
    if (*check_cmd) cfg.command = Command::check;
    if (*list_cmd) cfg.command = Command::list;

    // rho and alpha must be strictly inside their ranges.
    if (ov.rho && (*ov.rho <= 0.0 || *ov.rho >= 1.0)) {
      throw CLI::ValidationError("--rho", "must lie strictly between 0 and 1");
    }
    if (ov.alpha_exp && *ov.alpha_exp <= 0.0) {
      throw CLI::ValidationError("--alpha", "must lie in (0, 1]");
    }

    if (!algo.empty()) cfg.algorithms = {parse_algorithm(algo)};
    if (!algos.empty()) {
      cfg.algorithms.clear();
      for (const auto& a : split_list(algos)) cfg.algorithms.push_back(parse_algorithm(a));
    }
    if (cfg.command == Command::run) {
      if (problem.empty()) throw CLI::RequiredError("--problem");
      cfg.problems = {problem};
      if (cfg.algorithms.size() != 1) {
        throw CLI::ValidationError("--algos", "run takes a single algorithm");
      }
    } else {
      cfg.problems = split_list(problems);
      if (!problem.empty()) cfg.problems.push_back(problem);
      if (cfg.problems.empty()) cfg.problems = problem_names();
    }
    for (const auto& p : cfg.problems) (void)get_problem(p);

    cfg.dimension = dim;
    if (!cfg.full_scale && !dim && cfg.command == Command::suite) cfg.dimension = 10;
    if (runs) cfg.runs = *runs;
    else if (cfg.full_scale) cfg.runs = 100;
    if (cfg.command == Command::run) cfg.runs = 1;
    if (budget) cfg.budget = *budget;
    if (out_dir) cfg.output_dir = *out_dir;
    // as<>() on an option without results crashes in this CLI11 version.
    if (const auto* conf = app.get_config_ptr(); conf->count() > 0) {
      cfg.config_file = conf->results().front();
    }
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return {std::nullopt, kOk};
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return {std::nullopt, kOk};
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return {std::nullopt, kUsage};
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return {std::nullopt, kUsage};
  }
  return {cfg, kOk};
}

ExperimentPlan make_plan(const CliConfig& config) {
  ExperimentPlan plan;
  for (const auto& name : config.problems) {
    ProblemSelection sel{name, std::nullopt};
    if (config.dimension) {
      // run applies --dim strictly; suite skips fixed-size problems.
      if (config.command == Command::run || resizable(name)) sel.dimension = config.dimension;
    }
    plan.problems.push_back(sel);
  }
  plan.algorithms = config.algorithms;
  plan.runs = config.runs;
  plan.budget = config.budget;
  plan.base_seed = config.seed;
  plan.overrides = config.overrides;
  plan.workers = config.workers;
  return plan;
}

namespace {

void print_rows(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << std::left << std::setw(14) << "problem" << std::setw(12) << "algorithm" << std::right
      << std::setw(4) << "n" << std::setw(6) << "runs" << std::setw(16) << "H*" << std::setw(18)
      << "mean(H*)" << std::setw(12) << "std_err" << std::setw(8) << "eps" << std::setw(7)
      << "M_eps" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(14) << r.problem << std::setw(12) << to_string(r.algorithm)
        << std::right << std::setw(4) << r.dimension << std::setw(6) << r.runs << ' '
        << std::setw(15) << std::setprecision(10) << r.h_star << ' ' << std::setw(17)
        << std::setprecision(10) << r.h_bar_star << ' ' << std::setw(11) << std::setprecision(3)
        << r.std_err << ' ' << std::setw(7) << r.eps << std::setw(7) << r.m_eps << '\n';
  }
}

int report_failures(const std::vector<TrialReport>& reports, std::ostream& err) {
  int failed = 0;
  for (const auto& r : reports) {
    if (r.error) {
      ++failed;
      err << "run failed: " << r.problem << " " << to_string(r.algorithm) << " run " << r.run_id
          << " (seed " << r.seed << "): " << *r.error << '\n';
    }
  }
  return failed;
}

}  // namespace

int execute(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::list: {
        for (const auto& name : problem_names()) {
          const Problem p = get_problem(name);
          out << std::left << std::setw(14) << p.name << std::setw(22) << p.label << " n=" << std::setw(3)
              << p.dimension << " H*=" << format_double(p.reported_optimum) << "  box=["
              << p.box_lo << ", " << p.box_hi << "]\n";
        }
        return kOk;
      }
      case Command::check: {
        bool ok = true;
        for (const auto& c : run_self_check(config.seed)) {
          ok = ok && c.passed;
          out << (c.passed ? "PASS" : "FAIL") << '\t' << c.name << '\t' << "metric="
              << format_double(c.metric) << '\t' << "threshold=" << format_double(c.threshold);
          if (!c.detail.empty()) out << '\t' << c.detail;
          out << '\n';
        }
        return ok ? kOk : kCheckFailure;
      }
      case Command::run: {
        const ExperimentPlan plan = make_plan(config);
        const auto reports = run_experiment(plan);
        if (report_failures(reports, err) > 0) return kRunFailure;
        const auto& r = reports.front();
        out << "problem " << r.problem << " (n=" << r.dimension << "), algorithm "
            << to_string(r.algorithm) << ", seed " << r.seed << '\n';
        out << "evaluations " << r.evals_used << ", iterations " << r.curve.size() << '\n';
        out << "best value " << format_double(r.best_value) << '\n';
        out << "best solution";
        for (double v : r.best_solution) out << ' ' << format_double(v);
        out << '\n';
        return kOk;
      }
      case Command::suite: {
        const ExperimentPlan plan = make_plan(config);
        const auto reports = run_experiment(plan);
        const auto rows = aggregate(reports);
        print_rows(rows, out);
        export_results(rows, reports, config.output_dir);
        out << "wrote " << (std::filesystem::path(config.output_dir) / "results.csv").string()
            << " and curves.csv\n";
        return report_failures(reports, err) > 0 ? kRunFailure : kOk;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRunFailure;
  }
  return kRunFailure;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const ParseResult parsed = parse_args(args, out, err);
  if (!parsed.config) return parsed.exit_code;
  return execute(*parsed.config, out, err);
}

}  // namespace gass::cli
