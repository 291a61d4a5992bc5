// Command-line front end; talks to the library exclusively through the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "fraclab.h"

namespace {

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        long workers, long seed, bool have_workers, bool have_seed) {
  frl_config* cfg = config_path.empty() ? frl_config_create() : frl_config_load(config_path.c_str());
  if (!cfg) {
    std::fprintf(stderr, "fraclab: %s\n", frl_last_error());
    return 64;
  }
  if (have_workers) frl_config_set(cfg, "workers", std::to_string(workers).c_str());
  if (have_seed) frl_config_set(cfg, "seed", std::to_string(seed).c_str());
  const frl_status st = frl_run(cfg, command.c_str(), out_dir.c_str());
  frl_config_free(cfg);
  if (st != FRL_OK) std::fprintf(stderr, "fraclab %s: %s\n", command.c_str(), frl_last_error());
  switch (st) {
    case FRL_OK: return 0;
    case FRL_ERR_TOLERANCE: return 1;
    case FRL_ERR_INFEASIBLE: return 2;
    case FRL_ERR_USAGE:
    case FRL_ERR_INVALID: return 64;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraclab: maximal-inequality and Fourier-decay experiments over box measures"};
  app.set_version_flag("--version", frl_version());
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long workers = 0, seed = 0;
  bool have_workers = false, have_seed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value configuration file");
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--workers", workers, "worker threads")->each([&](const std::string&) {
      have_workers = true;
    });
    sub->add_option("--seed", seed, "seed for randomized steps")->each([&](const std::string&) {
      have_seed = true;
    });
  };

  const char* names[] = {"identities", "bourgain", "decay", "project", "pipeline"};
  const char* blurbs[] = {
      "change-of-variables, frame, and X-ray identity suites",
      "lattice counterexample: lower bounds, measure profile, exponent fit",
      "surface decay-exponent fits over paraboloid and cone",
      "theta-averaged projected energies against the full energy",
      "the maximal-inequality chain witnessed step by step",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], blurbs[i]));

  CLI11_PARSE(app, argc, argv);
  for (const auto* sub : app.get_subcommands())
    return run(sub->get_name(), config_path, out_dir, workers, seed, have_workers, have_seed);
  return 64;
}
