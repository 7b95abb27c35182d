// Command-line front end over the C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "wot/wot.h"

namespace {

int exit_code_for(wot_status st) {
  switch (st) {
    case WOT_OK: return 0;
    case WOT_ERR_CONFIG:
    case WOT_ERR_ARGUMENT:
    case WOT_ERR_GROWTH: return 2;
    case WOT_ERR_NUMERICAL: return 3;
    case WOT_ERR_INFEASIBLE: return 4;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex risk measures with weak transport penalties: experiment runner"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", wot_version());

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int epochs = 0;
  bool reproducible = false;
  bool quiet = false;
  app.add_option("--config", config, "Config file (JSON or key = value lines)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Run seed (overrides the config)");
  app.add_option("--out", out, "Output directory (overrides the config)");
  app.add_flag("--reproducible", reproducible, "Sequential execution for byte-identical numeric output");
  app.add_option("--epochs", epochs, "Training epochs override")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "Do not print the result summary");

  const char* help[][2] = {
      {"earthquake", "Worst-case insurance loss under Wasserstein uncertainty (network + pointwise surface)"},
      {"bull-spread", "Martingale price bounds for a bull call spread across horizons"},
      {"max-call", "Two-asset max-call upper bound: network vs pointwise transform"},
      {"dim-sweep", "Upper bounds and training time for four basket payoffs as the dimension grows"},
      {"ctransform-grid", "Pointwise C-transform on a tensor grid"},
      {"moment-bounds", "Price bounds from bid-ask quotes over finitely supported laws"}};
  for (const auto& h : help) app.add_subcommand(h[0], h[1])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  wot_run_options opts;
  wot_run_options_defaults(&opts);
  if (*seed_opt) {
    opts.has_seed = 1;
    opts.seed = seed;
  }
  if (!out.empty()) opts.out_dir = out.c_str();
  opts.reproducible = reproducible ? 1 : 0;
  opts.epochs = epochs;

  char* summary = nullptr;
  const wot_status st =
      wot_run_experiment(experiment.c_str(), config.empty() ? nullptr : config.c_str(), &opts, &summary);
  if (summary && !quiet) std::puts(summary);
  wot_string_free(summary);
  if (st != WOT_OK) std::fprintf(stderr, "wotrisk %s: %s\n", experiment.c_str(), wot_last_error());
  return exit_code_for(st);
}
