#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wot/costs.hpp"
#include "wot/ctransform.hpp"
#include "wot/measures.hpp"
#include "wot/neural.hpp"
#include "wot/payoffs.hpp"

namespace wot {

enum class Method { pointwise, network };
std::string to_string(Method m);
Method parse_method(std::string_view s);

struct RhoEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::pointwise;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Pointwise transform values at n draws of the measure (seeded).
std::vector<double> pointwise_integrand(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost,
                                        Regime regime, std::size_t n, std::uint64_t seed,
                                        const SearchConfig& cfg = {});

/// Monte Carlo mean of the pointwise transform over n draws of the measure.
RhoEstimate rho_pointwise(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                          std::size_t n, std::uint64_t seed, const SearchConfig& cfg = {});

/// Trains the variational network and returns its final evaluation. When
/// `report` is non-null the full training report is stored there.
RhoEstimate rho_network(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                        const TrainConfig& cfg, TrainReport* report = nullptr);

/// Monte Carlo E[f] over n draws.
RhoEstimate reference_value(const ReferenceMeasure& measure, const Payoff& f, std::size_t n, std::uint64_t seed);

struct BoundsOptions {
  Method method = Method::pointwise;
  std::size_t samples = 100'000;  // pointwise integration and reference sample
  std::uint64_t seed = 0;         // shared by reference, upper and lower
  double scale = 1.0;             // cost multiplier
  SearchConfig search;
  TrainConfig train;              // network method; eval sample = `samples` draws at `seed`
};

struct PriceBounds {
  double t = 0.0;
  double lower = 0.0;
  double lower_se = 0.0;
  double reference = 0.0;
  double reference_se = 0.0;
  double upper = 0.0;
  double upper_se = 0.0;
};

/// Upper rho_t(f) and lower -rho_t(-f) under the martingale constraint with
/// cost scale * t^(1 - p/2) v^p, plus the Monte Carlo reference E[f]. All
/// three share one sample seed.
PriceBounds price_bounds(const ReferenceMeasure& measure, const Payoff& f, double p, double t,
                         const BoundsOptions& opts = {});

/// price_bounds at each t; t_list must be strictly increasing and positive.
std::vector<PriceBounds> bounds_curve(const ReferenceMeasure& measure, const Payoff& f, double p,
                                      std::span<const double> t_list, const BoundsOptions& opts = {});

}  // namespace wot
