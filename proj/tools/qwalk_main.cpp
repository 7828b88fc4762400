#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qwalk/cli_runner.hpp"
#include "qwalk/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-dimensional quantum walks with q-exponential step disorder"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t realizations = 0;
  unsigned threads = 1;
  bool quiet = false;

  for (const char* name : {"run", "ensemble", "sweep", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment spec file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "override the spec seed");
    sub->add_option("--realizations", realizations, "override the realization count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }

  CLI11_PARSE(app, argc, argv);
  const CLI::App* chosen = app.get_subcommands().front();

  try {
    qwalk::ExperimentSpec spec = qwalk::load_spec(config_path);
    if (chosen->count("--seed")) spec.walk.seed = seed;
    if (chosen->count("--realizations")) spec.realizations = realizations;
    qwalk::ExecuteOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    opts.log = quiet ? nullptr : &std::cerr;
    const auto bundle = qwalk::execute(spec, qwalk::parse_subcommand(chosen->get_name()), opts);
    return bundle.passed ? 0 : 1;
  } catch (const qwalk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
