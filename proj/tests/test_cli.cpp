#include "gass/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gass;
using namespace gass::cli;
namespace fs = std::filesystem;

namespace {

struct Parsed {
  ParseResult result;
  std::string out, err;
};

Parsed parse(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Parsed p{parse_args(args, out, err), "", ""};
  p.out = out.str();
  p.err = err.str();
  return p;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gass_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("suite flags build a plan with reduced problems") {
  const auto p = parse({"suite", "--problems", "sphere,griewank", "--dim", "10", "--runs", "5",
                        "--seed", "7"});
  REQUIRE(p.result.config);
  const CliConfig& c = *p.result.config;
  CHECK(c.command == Command::suite);
  CHECK(c.problems == std::vector<std::string>{"sphere", "griewank"});
  CHECK(c.runs == 5);
  CHECK(c.seed == 7);

  const ExperimentPlan plan = make_plan(c);
  REQUIRE(plan.problems.size() == 2);
  CHECK(plan.problems[0].name == "sphere");
  CHECK(plan.problems[0].dimension == 10);
  CHECK(plan.problems[1].dimension == 10);
  CHECK(plan.runs == 5);
  CHECK(plan.base_seed == 7);
  CHECK(plan.algorithms == std::vector<Algorithm>{Algorithm::gass});
}

TEST_CASE("run picks up the problem defaults with no extra flags") {
  const auto p = parse({"run", "--problem", "shekel", "--algo", "gass-avg"});
  REQUIRE(p.result.config);
  const ExperimentPlan plan = make_plan(*p.result.config);
  CHECK(plan.runs == 1);
  REQUIRE(plan.problems.size() == 1);
  CHECK(!plan.problems[0].dimension);
  const Problem shekel = resolve_problem(plan.problems[0]);
  const EngineConfig cfg = make_engine_config(shekel, plan.algorithms.at(0), plan.budget, plan.overrides);
  CHECK(cfg.algorithm == Algorithm::gass_avg);
  CHECK(cfg.shape.rho == 0.02);
  CHECK(cfg.schedules.alpha0 == 0.3);
  CHECK(cfg.feedback_c == 0.1);
  CHECK(cfg.schedules.alpha_exp == 0.05);
  CHECK(cfg.schedules.n0 == 1000);
  CHECK(cfg.shape.s0 == 1e5);
}

TEST_CASE("suite defaults") {
  auto p = parse({"suite"});
  REQUIRE(p.result.config);
  CHECK(p.result.config->problems == problem_names());
  CHECK(p.result.config->dimension == 10);
  CHECK(p.result.config->runs == 10);
  // Fixed-size problems keep their dimension under --dim.
  const ExperimentPlan plan = make_plan(*p.result.config);
  CHECK(!plan.problems[0].dimension);
  CHECK(plan.problems[2].dimension == 10);

  p = parse({"suite", "--full-scale"});
  REQUIRE(p.result.config);
  CHECK(!p.result.config->dimension);
  CHECK(p.result.config->runs == 100);
}

TEST_CASE("usage errors exit with code 2") {
  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{{},
                                             {"--runs", "3"},
                                             {"suite", "--bogus"},
                                             {"suite", "--runs", "zero"},
                                             {"suite", "--rho", "1.5"},
                                             {"suite", "--rho", "0"},
                                             {"run"},
                                             {"run", "--problem", "ackley"},
                                             {"run", "--problem", "sphere", "--algos", "gass,gass-avg"},
                                             {"suite", "--algos", "gass,mras"},
                                             {"frobnicate"}}) {
    CAPTURE(args.size());
    const auto p = parse(args);
    CHECK(!p.result.config);
    CHECK(p.result.exit_code == kUsage);
    CHECK(!p.err.empty());
  }
  std::ostringstream out, err;
  CHECK(main_entry({}, out, err) == 2);
  CHECK(err.str().find("Usage") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto p = parse({"--help"});
  CHECK(!p.result.config);
  CHECK(p.result.exit_code == kOk);
  CHECK(p.out.find("suite") != std::string::npos);
}

TEST_CASE("config file sits between flags and defaults") {
  const fs::path file = scratch("config.ini");
  std::ofstream(file) << "rho = 0.1\nruns = 4\nbudget = 20000\nproblems = sphere\n";

  auto p = parse({"suite", "--config", file.string()});
  REQUIRE(p.result.config);
  CHECK(p.result.config->overrides.rho == 0.1);
  CHECK(p.result.config->runs == 4);
  CHECK(p.result.config->budget == 20000);
  CHECK(p.result.config->problems == std::vector<std::string>{"sphere"});
  CHECK(p.result.config->config_file == file.string());

  p = parse({"suite", "--config", file.string(), "--rho", "0.2", "--runs", "2"});
  REQUIRE(p.result.config);
  CHECK(p.result.config->overrides.rho == 0.2);
  CHECK(p.result.config->runs == 2);
  CHECK(p.result.config->budget == 20000);

  std::ofstream(file) << "rho = 0.1\nnot_a_flag = 3\n";
  p = parse({"suite", "--config", file.string()});
  CHECK(p.result.exit_code == kUsage);

  p = parse({"suite", "--config", (file.string() + ".missing")});
  CHECK(p.result.exit_code == kUsage);
  fs::remove(file);
}

TEST_CASE("output directory from the environment") {
  ::setenv("GASS_OUTPUT_DIR", "/tmp/from_env", 1);
  auto p = parse({"suite"});
  REQUIRE(p.result.config);
  CHECK(p.result.config->output_dir == "/tmp/from_env");
  p = parse({"suite", "--out", "/tmp/from_flag"});
  REQUIRE(p.result.config);
  CHECK(p.result.config->output_dir == "/tmp/from_flag");
  ::unsetenv("GASS_OUTPUT_DIR");
  p = parse({"suite"});
  CHECK(p.result.config->output_dir == "results");
}

TEST_CASE("list prints every problem") {
  std::ostringstream out, err;
  CHECK(main_entry({"list"}, out, err) == kOk);
  const std::string text = out.str();
  for (const auto& name : problem_names()) CHECK(text.find(name) != std::string::npos);
  CHECK(text.find("n=50") != std::string::npos);
  CHECK(text.find("H*=10.153") != std::string::npos);
  CHECK(text.find("H*=-0.998") != std::string::npos);
}

TEST_CASE("check passes with seed 0") {
  std::ostringstream out, err;
  CHECK(main_entry({"check", "--seed", "0"}, out, err) == kOk);
  std::istringstream lines(out.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("PASS\t", 0) == 0);
    ++count;
  }
  CHECK(count == 5);
}

TEST_CASE("run prints the best value") {
  std::ostringstream out, err;
  CHECK(main_entry({"run", "--problem", "sphere", "--dim", "2", "--budget", "20000", "--seed", "3"},
                   out, err) == kOk);
  CHECK(out.str().find("best value -1") != std::string::npos);
  CHECK(out.str().find("evaluations 20000") != std::string::npos);

  std::ostringstream out2, err2;
  CHECK(main_entry({"run", "--problem", "shekel", "--dim", "3"}, out2, err2) == kRunFailure);
  CHECK(err2.str().find("fixed dimension") != std::string::npos);
}

TEST_CASE("suite writes both CSV files") {
  const fs::path dir = scratch("suite");
  std::ostringstream out, err;
  CHECK(main_entry({"suite", "--problems", "sphere,rastrigin", "--dim", "2", "--runs", "2",
                    "--budget", "3000", "--algos", "gass,modified-ce", "--workers", "2", "--out",
                    dir.string()},
                   out, err) == kOk);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "curves.csv"));
  const auto rows = parse_results_csv(dir / "results.csv");
  CHECK(rows.size() == 4);
  CHECK(out.str().find("M_eps") != std::string::npos);
  fs::remove_all(dir);
}
