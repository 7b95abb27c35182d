#pragma once

#include <string>
#include <vector>

#include "wot/config.hpp"

namespace wot {

/// Outcome of one experiment run. `summary` is also written to disk as the
/// experiment's result JSON; `exit_code` is 0, 3 when the moment optimizer finds no feasible certificate, or 4 for infeasible quotes.
struct RunResult {
  Json summary;
  int exit_code = 0;
  std::vector<std::string> files;
};

RunResult run_earthquake(const ExperimentConfig& cfg);
RunResult run_bull_spread(const ExperimentConfig& cfg);
RunResult run_max_call(const ExperimentConfig& cfg);
RunResult run_dim_sweep(const ExperimentConfig& cfg);
RunResult run_ctransform_grid(const ExperimentConfig& cfg);
RunResult run_moment_bounds(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Diffusion marginal with x0 = spot * 1, sigma = vol * chol(R) for the
/// equicorrelation matrix R with off-diagonal `correlation`.
ReferenceMeasure equicorrelated_diffusion(int d, double spot, double vol, double correlation, double maturity);

}  // namespace wot
