#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wot/payoffs.hpp"

namespace wot {

/// Quoted option with nonnegative payoff and bid-ask interval.
struct Instrument {
  std::string name;
  Payoff payoff;
  double bid = 0.0;
  double ask = 0.0;
};

/// Price bounds for `target` over laws with mean x0 whose instrument prices
/// lie inside the quoted intervals. Atoms may be confined to the box
/// [lower, upper] in every coordinate.
struct MomentProblem {
  Eigen::VectorXd x0;
  std::vector<Instrument> instruments;
  Payoff target = Payoff::constant(0.0, 1);
  std::optional<double> lower;
  std::optional<double> upper;

  int dim() const { return static_cast<int>(x0.size()); }
  /// 2n + 3 for n instruments.
  int atom_count() const { return 2 * static_cast<int>(instruments.size()) + 3; }
  void validate() const;
};

/// Weighted atoms sum_i p_i delta_{y_i} with diagnostics.
struct AtomicCandidate {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  double objective = 0.0;           // sum_i p_i target(y_i)
  double mean_residual = 0.0;       // |sum_i p_i y_i - x0|
  double interval_violation = 0.0;  // max over instruments of distance to [bid, ask]
  double weight_residual = 0.0;     // |sum_i p_i - 1|
};

struct MomentOptions {
  int starts = 8;
  int iterations_per_stage = 1500;
  double penalty0 = 10.0;
  int penalty_doublings = 12;
  double learning_rate = 0.02;
  double learning_rate_decay = 0.7;  // per penalty stage
  double tolerance = 1e-6;           // feasibility of returned certificates
  double infeasible_threshold = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class MomentStatus { ok, infeasible, optimizer_failure };
std::string to_string(MomentStatus s);

struct MomentBounds {
  MomentStatus status = MomentStatus::ok;
  double upper = 0.0;
  double lower = 0.0;
  AtomicCandidate upper_certificate;
  AtomicCandidate lower_certificate;
  /// Does delta_{x0} itself satisfy every quote, and by how much each misses.
  bool dirac_feasible = true;
  std::vector<double> dirac_violations;
  /// Smallest constraint violation reached by the feasibility search (only
  /// computed when no feasible certificate was found).
  double min_violation = 0.0;
};

/// Residual diagnostics and objective of a candidate for `payoff`.
AtomicCandidate evaluate_candidate(const MomentProblem& problem, const Payoff& payoff,
                                   std::vector<std::vector<double>> atoms, std::vector<double> weights);

/// Penalized multi-start ascent over 2n+3 atoms and softmax weights, then an
/// exact weight projection onto the mean and active interval constraints.
/// Reported bounds are the objectives of feasible certificates (inner bounds).
MomentBounds moment_bounds(const MomentProblem& problem, const MomentOptions& opts = {});

}  // namespace wot
