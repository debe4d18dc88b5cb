#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exportscore/commands.hpp"
#include "exportscore/common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"exportscore: firm export-status prediction, scoring, and diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = -1;
  bool no_timestamp = false;

  for (const char* name : {"simulate", "train", "predict", "evaluate", "score", "analyze"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "run-configuration JSON file");
    sub->add_option("--set", overrides, "override a config key, e.g. --set synth.n_firms=500");
    sub->add_option("--threads", threads, "cap worker threads (0 = hardware)");
    sub->add_flag("--no-timestamp", no_timestamp, "omit the timestamp comment from outputs");
  }

  CLI11_PARSE(app, argc, argv);
  std::string subcommand = app.get_subcommands().front()->get_name();

  if (threads >= 0) overrides.push_back("threads=" + std::to_string(threads));
  if (no_timestamp) overrides.push_back("emit_timestamp=false");

  try {
    exportscore::cli::RunConfig cfg = exportscore::cli::load_config(config_path, overrides);
    return exportscore::cli::run(subcommand, cfg, std::cout, std::cerr);
  } catch (const exportscore::Error& e) {
    std::cerr << "error: kind=" << exportscore::to_string(e.kind()) << " msg=\"" << e.what()
              << "\"\n";
    return 1;
  }
}
