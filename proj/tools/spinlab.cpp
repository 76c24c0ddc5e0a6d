#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <spinlab/config.hpp>
#include <spinlab/experiment.hpp>
#include <spinlab/lattice.hpp>

// Exit codes: 0 success, 1 unexpected error, 2 invalid configuration,
// 3 engine failure (budget or method infeasible), 4 contract violation.
int main(int argc, char** argv) {
  CLI::App app{"finite-window lattice spin experiments"};
  app.require_subcommand(1);

  spinlab::RunOptions options;
  std::uint64_t seed = 0;
  int threads = 0;

  for (const std::string& name : spinlab::experimentNames()) {
    CLI::App* sub = app.add_subcommand(name, spinlab::experimentSummary(name));
    sub->add_option("--config", options.configPath, "experiment configuration file")
        ->required();
    sub->add_option("--out", options.outDir, "output directory (default from the config)");
    sub->add_option("--seed", seed, "engine seed override");
    sub->add_option("--threads", threads, "worker thread override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--threads")) options.threads = threads;

  try {
    spinlab::runExperiment(sub->get_name(), options);
  } catch (const spinlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const spinlab::EngineError& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return 3;
  } catch (const spinlab::ContractError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
