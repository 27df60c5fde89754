#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>

#include "aeds/cli/commands.hpp"

namespace {

std::filesystem::path default_corpus() {
  for (const char* dir : {AEDS_CORPUS_DIR, AEDS_INSTALLED_CORPUS_DIR}) {
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) return dir;
  }
  return AEDS_INSTALLED_CORPUS_DIR;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace aeds::cli;
  CLI::App app{"Exterior differential systems on Lie algebroids"};
  app.name("aeds");
  std::string command;
  std::string file;
  bool json = false;
  bool timing = false;
  RunOptions opt;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  std::size_t max_degree = 0;
  std::size_t trials = 0;
  std::string corpus;

  app.add_option("command", command, "validate | ideal-check | integral-check | ip-report | helmholtz | two-form | "
                                     "sigma-check | solve | cohomology | ode | list")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("file", file, "problem file (for list: corpus directory)");
  app.add_flag("--json", json, "emit one JSON document");
  app.add_flag("--timing", timing, "include wall time in the report");
  auto* o_seed = app.add_option("--seed", seed, "sampling and solver seed");
  auto* o_samples = app.add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
  auto* o_abs = app.add_option("--tol-abs", tol_abs, "absolute tolerance")->check(CLI::PositiveNumber);
  auto* o_rel = app.add_option("--tol-rel", tol_rel, "relative tolerance")->check(CLI::PositiveNumber);
  auto* o_deg = app.add_option("--max-degree", max_degree, "solve: largest ansatz degree");
  auto* o_trials = app.add_option("--trials", trials, "solve: random null-space combinations per degree");
  app.add_option("--corpus", corpus, "list: corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  if (*o_seed) opt.seed = seed;
  if (*o_samples) opt.samples = samples;
  if (*o_abs) opt.tol_abs = tol_abs;
  if (*o_rel) opt.tol_rel = tol_rel;
  if (*o_deg) opt.max_degree = max_degree;
  if (*o_trials) opt.trials = trials;

  if (command == "list") {
    const std::filesystem::path dir = !corpus.empty() ? corpus : !file.empty() ? file : default_corpus().string();
    const auto entries = list_corpus(dir);
    std::cout << (json ? render_list_json(entries) : render_list_text(entries));
    return kExitPass;
  }
  if (file.empty()) {
    std::cerr << "aeds: " << command << " needs a problem file\n";
    return kExitInput;
  }
  const RunResult res = run_file(command, file, opt);
  std::cout << (json ? render_json(res, timing) : render_text(res, timing));
  if (!res.error.empty()) std::cerr << "aeds: " << file << ": " << res.error << "\n";
  return res.exit_code;
}
