#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qeleak/core/config.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/pipeline/stages.hpp"

namespace {

struct Args {
  std::string config;
  std::string run_dir;
  std::string cache_dir;
  std::optional<std::string> method;
  std::optional<int> k;
  std::optional<int> repeats;
  std::optional<bool> exhaustive;
  bool mock = false;
  bool force = false;
  int verbose = 0;
};

qeleak::RunConfig resolve_config(const Args& a) {
  qeleak::RunConfig cfg = qeleak::load_config(a.config);
  if (a.method) cfg.method = qeleak::parse_method(*a.method);
  if (a.k) cfg.k = *a.k;
  if (a.repeats) cfg.repeats = *a.repeats;
  if (a.exhaustive) cfg.exhaustive = *a.exhaustive;
  if (a.mock) cfg.mock.enabled = true;
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Args& a) {
  if (a.verbose >= 2) qeleak::log::threshold() = qeleak::log::Level::kDebug;
  else if (a.verbose == 1) qeleak::log::threshold() = qeleak::log::Level::kInfo;
  qeleak::pipeline::RunOptions opts;
  opts.run_dir = a.run_dir;
  opts.cache_dir = a.cache_dir;
  opts.force = a.force;
  qeleak::pipeline::Pipeline p(resolve_config(a), opts);
  if (command == "all") {
    p.run_all();
    std::cout << "run complete: " << p.path("report.txt").string() << "\n";
  } else if (p.run_stage(command)) {
    std::cout << command << ": done\n";
  } else {
    std::cout << command << ": already complete, nothing to do\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-expansion knowledge-leakage audit for fact verification"};
  app.set_version_flag("--version", std::string(QELEAK_VERSION));
  app.require_subcommand(1, 1);
  Args a;
  app.add_option("--config", a.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--run-dir", a.run_dir, "Run directory for stage outputs")->required();
  app.add_option("--cache-dir", a.cache_dir, "Provider response cache (default: <run-dir>/cache)");
  app.add_option("--method", a.method, "Expansion method")->check(CLI::IsMember({"query2doc", "hyde"}));
  app.add_option("--k", a.k, "Retrieval depth")->check(CLI::PositiveNumber);
  app.add_option("--repeats", a.repeats, "Generation repeats")->check(CLI::PositiveNumber);
  app.add_flag("--mock", a.mock, "Use the deterministic mock provider");
  app.add_option("--exhaustive", a.exhaustive, "Judge every evidence/sentence pair (true|false)");
  app.add_flag("--force", a.force, "Rerun completed stages and accept config changes");
  app.add_flag("-v,--verbose", a.verbose, "More logging (repeatable)");
  app.fallthrough();

  const char* stages[][2] = {{"ingest", "Load claims and corpus, drop unusable evidence"},
                             {"index", "Build the BM25 or dense index"},
                             {"expand", "Generate pseudo-documents"},
                             {"retrieve", "Rank documents for baseline and expanded queries"},
                             {"match", "Judge generated sentences against gold evidence"},
                             {"verdict", "Predict verdicts from retrieved evidence"},
                             {"report", "Write report.json and report.txt"},
                             {"all", "Run every remaining stage"}};
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), a);
  } catch (const qeleak::Error& e) {
    std::cerr << "qeleak: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "qeleak: internal error: " << e.what() << "\n";
    return 2;
  }
}
