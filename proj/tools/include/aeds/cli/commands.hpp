#ifndef AEDS_CLI_COMMANDS_HPP
#define AEDS_CLI_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeds/cli/problem.hpp"
#include "aeds/report.hpp"

namespace aeds::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInput = 2;

const std::vector<std::string>& command_names();
bool known_command(std::string_view name);

/// Command-line overrides of the [sampling] and [ip] settings.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  std::optional<std::size_t> max_degree;
  std::optional<std::size_t> trials;
};

struct RunResult {
  std::string command;
  std::string file;    // as given
  std::string digest;  // empty when the file could not be read
  SampleSpec sampling;
  std::vector<Report> reports;
  std::string verdict;
  std::string error;  // input or dispatch error text, if any
  int exit_code = kExitPass;
  double wall_seconds = 0.0;
};

/// Runs one command on a loaded problem. Library errors from the dispatched
/// checks are caught and mapped to exit codes.
RunResult run(const std::string& command, const ProblemFile& problem, const RunOptions& options = {});

/// Loads the file, then runs; load failures give exit code 2.
RunResult run_file(const std::string& command, const std::string& path, const RunOptions& options = {});

/// One JSON document. Wall time is included only when `timing` is set, so
/// that equal inputs give byte-identical output otherwise.
std::string render_json(const RunResult& result, bool timing = false);
std::string render_text(const RunResult& result, bool timing = false);

std::string render_list_json(const std::vector<CorpusEntry>& entries);
std::string render_list_text(const std::vector<CorpusEntry>& entries);

}  // namespace aeds::cli

#endif  // AEDS_CLI_COMMANDS_HPP
