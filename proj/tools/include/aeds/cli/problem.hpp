#ifndef AEDS_CLI_PROBLEM_HPP
#define AEDS_CLI_PROBLEM_HPP

// Problem files: TOML documents with the blocks [chart], [algebroid],
// [prolongation], [ideal], [section], [ip], [candidate], [ode] and
// [sampling]. Every block present is parsed and built eagerly, so that a
// malformed entry is reported with its line and column before any command
// runs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aeds/algebroid.hpp"
#include "aeds/eds.hpp"
#include "aeds/errors.hpp"
#include "aeds/ip.hpp"
#include "aeds/odesim.hpp"
#include "aeds/prolong.hpp"
#include "aeds/sampling.hpp"

namespace aeds::cli {

/// Input error with a 1-based source position (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0, std::size_t column = 0);
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

struct Candidate {
  std::optional<Multiplier> k;
  std::optional<Expr> lagrangian;
  std::optional<ExtendedSection> extended;  // s, P, Q given explicitly
  std::optional<ExprMatrix> mu;             // over the chart (t)
  std::optional<std::vector<Expr>> nu;
};

struct OdeRun {
  std::string name;
  OdeSystem system;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 1.0;
  double h = 1e-3;
  std::vector<Expr> exact;  // over (time); empty when no closed form is given
  double tol = 1e-6;
};

struct ProblemFile {
  std::string path;
  std::string digest;  // FNV-1a 64 of the file bytes, hex
  std::string name;
  std::string description;
  /// Designated commands with their expected exit codes.
  std::vector<std::pair<std::string, int>> commands;
  std::set<std::string> blocks;

  SampleSpec sampling;
  std::optional<Algebroid> algebroid;
  std::optional<ProlongedAlgebroid> prolongation;
  std::optional<IdealSpec> ideal;
  std::optional<BundleSection> section;
  std::optional<IpData> ip;
  std::size_t max_degree = 2;
  std::size_t trials = 32;
  std::optional<Candidate> candidate;
  std::vector<OdeRun> ode;

  bool has(const std::string& block) const { return blocks.count(block) > 0; }
};

std::string fnv1a_hex(std::string_view bytes);

/// Parses and builds a problem from TOML text; `path` is used in messages.
ProblemFile load_problem_text(const std::string& text, const std::string& path);
ProblemFile load_problem(const std::filesystem::path& path);

struct CorpusEntry {
  std::string name;
  std::string description;
  std::filesystem::path path;
};

/// The *.toml files of a directory, sorted by file name. A missing
/// directory yields an empty list.
std::vector<CorpusEntry> list_corpus(const std::filesystem::path& dir);

}  // namespace aeds::cli

#endif  // AEDS_CLI_PROBLEM_HPP
