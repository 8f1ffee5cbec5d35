#include <CLI11.hpp>

#include <iostream>

#include "gwspeed/errors.hpp"
#include "gwspeed/harness.hpp"

namespace gwspeed {

int cli_main(int argc, char** argv) {
  CLI::App app{"Biased random walks on Galton-Watson trees: speeds, couplings and bias thresholds", "gwspeed"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool quiet = false;

  const std::map<std::string, std::string> help{
      {"speed", "speed estimates of one distribution over a beta grid"},
      {"compare", "coupled speeds and gap of a dominating pair over a beta grid"},
      {"coupling-audit", "check the coupled interval tables against the transition law"},
      {"regen-stats", "regeneration block statistics and the |B| tail"},
      {"threshold", "bias thresholds: formula, numeric, ell or dscaled"},
      {"ell-check", "ell-fold domination check, threshold and sampler audit"},
      {"gen-k", "smallest generation k whose ratio bound drops below beta"},
  };
  for (const auto& kind : experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(kind, help.at(kind));
    sub->add_option("--config", config_path, "INI experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--workers", workers, "worker threads (default: run.workers, $GWSPEED_WORKERS, 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (overrides run.out)");
    sub->add_flag("-q,--quiet", quiet, "no progress lines");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  RunOptions options;
  options.seed = seed;
  options.workers = workers;
  if (out) options.out = *out;

  RunResult r;
  try {
    const Config config = Config::load(config_path);
    std::ostream null_stream(nullptr);
    r = run_experiment(kind, config, options, quiet ? null_stream : std::cerr);
  } catch (const Error& e) {
    std::cerr << "error [" << kind << "]: " << e.what() << '\n';
    return exit_code(e.category());
  }
  (r.exit_code == 0 ? std::cout : std::cerr) << r.message << '\n';
  if (r.exit_code == 0 && !quiet) std::cerr << "outputs in " << r.out_dir.string() << '\n';
  return r.exit_code;
}

}  // namespace gwspeed
