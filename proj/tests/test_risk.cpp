#include <doctest.h>

#include <cmath>
#include <vector>

#include "wot/black_scholes.hpp"
#include "wot/error.hpp"
#include "wot/risk.hpp"
#include "wot/stats.hpp"

using namespace wot;

namespace {

ReferenceMeasure bs_measure() { return ReferenceMeasure::lognormal(Eigen::VectorXd::Ones(1), 0.2, 0.5); }

SearchConfig floored() {
  SearchConfig cfg;
  cfg.floor = 0.0;
  return cfg;
}

}  // namespace

TEST_SUITE("risk") {
  TEST_CASE("constant payoffs") {
    const auto mu = bs_measure();
    const auto zero = rho_pointwise(mu, Payoff::constant(0.0, 1), CostSpec(3.0, 1.0 / 12), Regime::martingale, 500, 1);
    CHECK(zero.value == 0.0);
    CHECK(zero.std_error == 0.0);
    const auto m = rho_pointwise(mu, Payoff::constant(0.25, 1), CostSpec(2.0), Regime::unconstrained, 500, 1);
    CHECK(m.value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.std_error < 1e-12);
    CHECK(m.samples == 500);
    CHECK(m.method == Method::pointwise);
  }

  TEST_CASE("standard error is recomputed from the integrand") {
    const auto mu = bs_measure();
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const CostSpec c(3.0, 1.0 / 12);
    const auto vals = pointwise_integrand(mu, f, c, Regime::martingale, 400, 8);
    const auto est = rho_pointwise(mu, f, c, Regime::martingale, 400, 8);
    const MeanEstimate me = mean_and_error(vals);
    CHECK(est.value == me.mean);
    CHECK(est.std_error == me.std_error);
  }

  TEST_CASE("affine payoff is pinned by the martingale constraint") {
    const auto mu = bs_measure();
    const auto est = rho_pointwise(mu, Payoff::affine({1.0}, 0.0), CostSpec(3.0, 1.0 / 12), Regime::martingale, 4000, 3);
    CHECK(std::abs(est.value - 1.0) <= 3.0 * est.std_error);
  }

  TEST_CASE("zero-cost bull spread approaches the concave envelope") {
    const auto mu = bs_measure();
    const double target = 0.25 * (1.0 - bs_call(1.0, 1.2, 0.2, 0.5));
    const auto est = rho_pointwise(mu, Payoff::bull_spread(0.9, 1.2), CostSpec(3.0, std::nullopt, 0.0),
                                   Regime::martingale, 4000, 5, floored());
    CHECK(std::abs(est.value - target) <= 3.0 * est.std_error);
  }

  TEST_CASE("monetary axioms with common random numbers") {
    const auto mu = bs_measure();
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const CostSpec c(3.0, 1.0 / 12);
    const auto base = rho_pointwise(mu, f, c, Regime::martingale, 1000, 42);
    const auto shifted = rho_pointwise(mu, Payoff::shifted(f, 0.1), c, Regime::martingale, 1000, 42);
    CHECK(std::abs(shifted.value - base.value - 0.1) < 1e-6);
    const auto upper = rho_pointwise(mu, Payoff::constant(0.3, 1), c, Regime::martingale, 1000, 42);
    CHECK(base.value <= upper.value);
    const Payoff g = Payoff::affine({0.2}, -0.1);
    const auto rg = rho_pointwise(mu, g, c, Regime::martingale, 1000, 42);
    const auto mix = rho_pointwise(mu, Payoff::mixture(f, g, 0.5), c, Regime::martingale, 1000, 42);
    CHECK(mix.value <= 0.5 * base.value + 0.5 * rg.value + 1e-9);
  }

  TEST_CASE("reference value") {
    const auto mu = bs_measure();
    const auto ref = reference_value(mu, Payoff::bull_spread(0.9, 1.2), 200000, 4);
    const double exact = bs_call(1.0, 0.9, 0.2, 0.5) - bs_call(1.0, 1.2, 0.2, 0.5);
    CHECK(std::abs(ref.value - exact) <= 3.0 * ref.std_error);
  }

  TEST_CASE("price bounds sandwich the reference") {
    const auto mu = bs_measure();
    BoundsOptions opts;
    opts.samples = 2000;
    opts.seed = 6;
    const auto b = price_bounds(mu, Payoff::bull_spread(0.9, 1.2), 3.0, 1.0 / 12, opts);
    CHECK(b.t == 1.0 / 12);
    CHECK(b.lower <= b.reference + 1e-12);
    CHECK(b.reference <= b.upper + 1e-12);
    CHECK(b.upper > b.lower);
    const auto affine = price_bounds(mu, Payoff::affine({1.0}, 0.0), 3.0, 0.25, opts);
    CHECK(std::abs(affine.upper - affine.reference) < 1e-7);
    CHECK(std::abs(affine.lower - affine.reference) < 1e-7);
  }

  TEST_CASE("bounds curve") {
    const auto mu = bs_measure();
    BoundsOptions opts;
    opts.samples = 1000;
    opts.seed = 2;
    const std::vector<double> ts{1.0 / 52, 1.0 / 4};
    const auto curve = bounds_curve(mu, Payoff::bull_spread(0.9, 1.2), 3.0, ts, opts);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].upper <= curve[1].upper + 3.0 * curve[1].upper_se);
    CHECK(curve[0].lower >= curve[1].lower - 3.0 * curve[1].lower_se);
    CHECK(curve[0].reference == curve[1].reference);

    const std::vector<double> one{1.0 / 12};
    const auto single = bounds_curve(mu, Payoff::bull_spread(0.9, 1.2), 3.0, one, opts);
    const auto direct = price_bounds(mu, Payoff::bull_spread(0.9, 1.2), 3.0, 1.0 / 12, opts);
    REQUIRE(single.size() == 1);
    CHECK(single[0].upper == direct.upper);
    CHECK(single[0].lower == direct.lower);

    const std::vector<double> unsorted{0.5, 0.25};
    CHECK_THROWS_AS(bounds_curve(mu, Payoff::bull_spread(0.9, 1.2), 3.0, unsorted, opts), ArgumentError);
    const std::vector<double> nonpositive{0.0, 0.25};
    CHECK_THROWS_AS(bounds_curve(mu, Payoff::bull_spread(0.9, 1.2), 3.0, nonpositive, opts), ArgumentError);
  }

  TEST_CASE("network estimate of a constant payoff") {
    const auto mu = bs_measure();
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch = 20;
    cfg.hidden = 1;
    cfg.width = 4;
    cfg.eval_samples = 1000;
    TrainReport rep;
    const auto est = rho_network(mu, Payoff::constant(1.5, 1), CostSpec(3.0, 1.0 / 12), Regime::martingale, cfg, &rep);
    CHECK(est.method == Method::network);
    CHECK(std::abs(est.value - 1.5) <= std::max(2.0 * est.std_error, 1e-3));
    CHECK(rep.raw.size() == 100);
    CHECK(est.value == rep.estimate);
  }

  TEST_CASE("method names") {
    CHECK(parse_method("network") == Method::network);
    CHECK(to_string(Method::pointwise) == "pointwise");
    CHECK_THROWS_AS(parse_method("magic"), ArgumentError);
  }
}
