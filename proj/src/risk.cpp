#include "wot/risk.hpp"

#include "wot/error.hpp"
#include "wot/parallel.hpp"
#include "wot/stats.hpp"

namespace wot {

std::string to_string(Method m) { return m == Method::pointwise ? "pointwise" : "network"; }

Method parse_method(std::string_view s) {
  if (s == "pointwise") return Method::pointwise;
  if (s == "network") return Method::network;
  throw ArgumentError("unknown method: " + std::string(s));
}

std::vector<double> pointwise_integrand(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost,
                                        Regime regime, std::size_t n, std::uint64_t seed, const SearchConfig& cfg) {
  if (measure.dim() != f.dim()) throw ArgumentError("measure and payoff dimensions differ");
  if (!check_growth(f, cost))
    throw GrowthError("payoff " + f.name() + " is not dominated by cost " + cost_id(cost));
  cfg.validate();
  const Samples xs = measure.sample(n, seed);
  std::vector<double> values(n);
  parallel_for(n, [&](std::size_t j) {
    const auto col = xs.col(static_cast<Eigen::Index>(j));
    values[j] = ctrans(f, cost, regime, std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), cfg);
  });
  return values;
}

RhoEstimate rho_pointwise(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                          std::size_t n, std::uint64_t seed, const SearchConfig& cfg) {
  const std::vector<double> values = pointwise_integrand(measure, f, cost, regime, n, seed, cfg);
  const MeanEstimate est = mean_and_error(values);
  return {est.mean, est.std_error, Method::pointwise, n, seed};
}

RhoEstimate rho_network(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                        const TrainConfig& cfg, TrainReport* report) {
  TrainReport r = train(measure, f, cost, regime, cfg);
  RhoEstimate est{r.estimate, r.std_error, Method::network, r.eval_samples, r.eval_seed};
  if (report) *report = std::move(r);
  return est;
}

RhoEstimate reference_value(const ReferenceMeasure& measure, const Payoff& f, std::size_t n, std::uint64_t seed) {
  if (measure.dim() != f.dim()) throw ArgumentError("measure and payoff dimensions differ");
  const Samples xs = measure.sample(n, seed);
  std::vector<double> values(n);
  for (std::size_t j = 0; j < n; ++j) values[j] = f.eval_unchecked(xs.col(static_cast<Eigen::Index>(j)).data());
  const MeanEstimate est = mean_and_error(values);
  return {est.mean, est.std_error, Method::pointwise, n, seed};
}

PriceBounds price_bounds(const ReferenceMeasure& measure, const Payoff& f, double p, double t,
                         const BoundsOptions& opts) {
  if (!(t > 0.0)) throw ArgumentError("price bounds need t > 0");
  const CostSpec cost(p, t, opts.scale);
  const Payoff neg = Payoff::scaled(f, -1.0);

  RhoEstimate upper, lower;
  if (opts.method == Method::pointwise) {
    upper = rho_pointwise(measure, f, cost, Regime::martingale, opts.samples, opts.seed, opts.search);
    lower = rho_pointwise(measure, neg, cost, Regime::martingale, opts.samples, opts.seed, opts.search);
  } else {
    TrainConfig tc = opts.train;
    tc.eval_samples = opts.samples;
    tc.eval_seed = opts.seed;
    upper = rho_network(measure, f, cost, Regime::martingale, tc);
    lower = rho_network(measure, neg, cost, Regime::martingale, tc);
  }
  const RhoEstimate ref = reference_value(measure, f, opts.samples, opts.seed);
  return {t, -lower.value, lower.std_error, ref.value, ref.std_error, upper.value, upper.std_error};
}

std::vector<PriceBounds> bounds_curve(const ReferenceMeasure& measure, const Payoff& f, double p,
                                      std::span<const double> t_list, const BoundsOptions& opts) {
  if (t_list.empty()) throw ArgumentError("t list is empty");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0)) throw ArgumentError("t values must be positive");
    if (i > 0 && !(t_list[i] > t_list[i - 1])) throw ArgumentError("t values must be strictly increasing");
  }
  std::vector<PriceBounds> out;
  out.reserve(t_list.size());
  for (double t : t_list) out.push_back(price_bounds(measure, f, p, t, opts));
  return out;
}

}  // namespace wot
