#pragma once

#include "gass/harness.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gass::cli {

enum class Command { run, suite, check, list };

struct CliConfig {
  Command command = Command::list;
  std::vector<std::string> problems;
  std::vector<Algorithm> algorithms{Algorithm::gass};
  std::optional<Eigen::Index> dimension;
  int runs = 10;
  std::int64_t budget = 1'000'000;
  std::uint64_t seed = 0;
  std::string output_dir = "results";
  ParameterOverrides overrides;
  std::string config_file;
  unsigned workers = 1;
  bool full_scale = false;
};

struct ParseResult {
  std::optional<CliConfig> config;  // empty when parsing stopped (help or error)
  int exit_code = 0;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRunFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kCheckFailure = 3;

/// Flag > config file > environment (output directory only) > problem defaults > built-in
/// defaults. Usage and error text go to `err`.
ParseResult parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Builds the experiment plan for `run` and `suite`.
ExperimentPlan make_plan(const CliConfig& config);

int execute(const CliConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + execute; args excludes the program name.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gass::cli
