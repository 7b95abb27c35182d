#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wot/black_scholes.hpp"
#include "wot/ctransform.hpp"
#include "wot/envelope.hpp"
#include "wot/error.hpp"
#include "wot/rng.hpp"

using namespace wot;

namespace {

std::vector<double> pt(double x) { return {x}; }

SearchConfig floored() {
  SearchConfig cfg;
  cfg.floor = 0.0;
  return cfg;
}

const CostSpec kZeroCost(3.0, std::nullopt, 0.0);

}  // namespace

TEST_SUITE("ctransform") {
  TEST_CASE("unconstrained closed forms") {
    const Payoff lin = Payoff::affine({1.0}, 0.0);
    const CostSpec quad(2.0);
    CHECK(ctrans_unconstrained(lin, quad, pt(0.5)) == doctest::Approx(0.75).epsilon(1e-6));
    for (double x : {-1.0, 0.0, 2.5}) {
      CHECK(ctrans_unconstrained(lin, quad, pt(x)) == doctest::Approx(x + 0.25).epsilon(1e-6));
    }
    // c x^2 / (1 - c) at c = 0.5.
    CHECK(ctrans_unconstrained(Payoff::quadratic(0.5, 1), quad, pt(1.0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ctrans_unconstrained(Payoff::quadratic(0.25, 1), quad, pt(2.0)) ==
          doctest::Approx(0.25 * 4.0 / 0.75).epsilon(1e-6));
    const auto sol = solve_unconstrained(lin, quad, pt(0.5));
    CHECK(sol.displacement[0] == doctest::Approx(0.5).epsilon(1e-4));
  }

  TEST_CASE("constant payoffs are fixed points") {
    for (int d : {1, 2, 3}) {
      const Payoff m = Payoff::constant(0.37, d);
      const std::vector<double> x(d, 0.8);
      CHECK(ctrans_unconstrained(m, CostSpec(2.0), x) == doctest::Approx(0.37).epsilon(1e-12));
      CHECK(ctrans_martingale(m, CostSpec(3.0, 1.0 / 12), x) == doctest::Approx(0.37).epsilon(1e-12));
    }
    CHECK(ctrans_parametric(Payoff::constant(-2.0, 1), 0.4, ScalarPenalty::linear(1.0), ScalarPenalty::linear(1.0)) ==
          doctest::Approx(-2.0).epsilon(1e-9));
  }

  TEST_CASE("martingale transform of an affine payoff is the payoff") {
    const Payoff f1 = Payoff::affine({1.0}, 0.0);
    const Payoff f2 = Payoff::affine({0.5, -1.5}, 0.25);
    for (double x : {0.3, 1.0, 2.2}) {
      CHECK(std::abs(ctrans_martingale(f1, CostSpec(3.0, 1.0 / 12), pt(x)) - x) < 1e-8);
      CHECK(std::abs(ctrans_martingale(f1, CostSpec(2.0), pt(x)) - x) < 1e-8);
    }
    const std::vector<double> x{1.0, 0.4};
    CHECK(std::abs(ctrans_martingale(f2, CostSpec(3.0), x) - f2.eval(x)) < 1e-8);
  }

  TEST_CASE("zero-cost martingale transform of the bull spread") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    CHECK(ctrans_martingale(f, kZeroCost, pt(0.6), floored()) == doctest::Approx(0.15).epsilon(1e-6));
    CHECK(ctrans_martingale(f, kZeroCost, pt(2.0), floored()) == doctest::Approx(0.3).epsilon(1e-6));
    const auto sol = solve_martingale(f, kZeroCost, pt(0.6), floored());
    CHECK(sol.barycenter_residual <= 1e-12);
    CHECK(sol.down[0] >= 0.0);
    const double bary = sol.weight * sol.up[0] + (1 - sol.weight) * sol.down[0];
    CHECK(std::abs(bary - 0.6) <= 1e-12);
  }

  TEST_CASE("kernels pressed against the floor keep their weight") {
    // At x = 0.01 the far point must sit at 0 and the weight on 1.2 is tiny.
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const auto sol = solve_martingale(f, kZeroCost, pt(0.01), floored());
    CHECK(sol.value == doctest::Approx(0.0025).epsilon(1e-6));
    CHECK(sol.down[0] >= 0.0);
    CHECK(sol.weight == doctest::Approx(0.01 / 1.2).epsilon(1e-4));
    CHECK(ctrans_martingale(f, kZeroCost, pt(0.0), floored()) == 0.0);
  }

  TEST_CASE("zero-cost martingale transform tracks the concave envelope") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const PiecewiseLinear env = concave_envelope_1d(f, 0.0, 3.0, 3001);
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double x = 0.05 * i;
      worst = std::max(worst, std::abs(ctrans_martingale(f, kZeroCost, pt(x), floored()) - env(x)));
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("solution reports are consistent") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const CostSpec c(3.0, 1.0 / 12);
    Rng r(13);
    for (int i = 0; i < 20; ++i) {
      const double x = 0.2 + 1.6 * r.uniform();
      const auto s = solve_martingale(f, c, pt(x));
      CHECK(s.barycenter_residual <= 1e-12);
      CHECK(s.weight > 0.0);
      CHECK(s.weight < 1.0);
      const double dy = s.up[0] - x;
      const double far = s.down[0] - x;
      const double val = s.weight * (f.eval(s.up) - c.cost(std::abs(dy))) +
                         (1 - s.weight) * (f.eval(s.down) - c.cost(std::abs(far)));
      CHECK(val == doctest::Approx(s.value).epsilon(1e-9));
    }
  }

  TEST_CASE("feasibility and oracle dominance") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const CostSpec c(3.0, 1.0 / 12);
    SearchConfig oracle_cfg;
    oracle_cfg.grid_points = 801;
    for (int i = 0; i <= 30; ++i) {
      const double x = 0.1 * i;
      const double fx = f.eval(pt(x));
      const double um = ctrans_unconstrained(f, c, pt(x));
      const double mm = ctrans_martingale(f, c, pt(x));
      CHECK(um >= fx);
      CHECK(mm >= fx);
      CHECK(um >= mm - 1e-9);
      CHECK(um >= ctrans_oracle_1d(f, c, Regime::unconstrained, x, 2.0, oracle_cfg) - 1e-6);
      CHECK(mm >= ctrans_oracle_1d(f, c, Regime::martingale, x, 2.0, oracle_cfg) - 1e-6);
    }
  }

  TEST_CASE("cash additivity and the convex-combination inequality") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const Payoff g = Payoff::earthquake({Bump{{1.0}, 0.4, 0.2}, Bump{{0.3}, 0.2, 0.1}});
    const CostSpec c(3.0, 1.0 / 12);
    for (Regime reg : {Regime::unconstrained, Regime::martingale}) {
      for (int i = 0; i <= 20; ++i) {
        const double x = 0.1 * i;
        const double tf = ctrans(f, c, reg, pt(x));
        const double tg = ctrans(g, c, reg, pt(x));
        CHECK(ctrans(Payoff::shifted(f, 0.7), c, reg, pt(x)) == doctest::Approx(tf + 0.7).epsilon(1e-6));
        for (double lam : {0.25, 0.5, 0.8}) {
          CHECK(ctrans(Payoff::mixture(f, g, lam), c, reg, pt(x)) <= lam * tf + (1 - lam) * tg + 1e-6);
        }
      }
    }
  }

  TEST_CASE("two-dimensional transforms") {
    const Payoff f = Payoff::max_call(1.0, 2);
    const CostSpec c(3.0, 1.0 / 12);
    const std::vector<double> x{1.3, 0.8};
    const double um = ctrans_unconstrained(f, c, x);
    const double mm = ctrans_martingale(f, c, x);
    CHECK(um >= 0.3);
    CHECK(mm >= 0.3);
    CHECK(um >= mm - 1e-9);
    // The max call dominates the call on its first coordinate, whose transform
    // is a one-dimensional problem.
    const double one = ctrans_unconstrained(Payoff::max_call(1.0, 1), c, pt(1.3));
    CHECK(um >= one - 1e-6);
  }

  TEST_CASE("growth failure is rejected") {
    CHECK_THROWS_AS(ctrans_unconstrained(Payoff::quadratic(1.0, 1), CostSpec(2.0), pt(0.0)), GrowthError);
    CHECK_THROWS_AS(ctrans_martingale(Payoff::affine({1.0}, 0.0), kZeroCost, pt(0.0)), GrowthError);
  }

  TEST_CASE("invalid search settings") {
    SearchConfig cfg;
    cfg.starts = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.p_clip = 0.6;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    CHECK_THROWS_AS(parse_regime("weird"), ArgumentError);
    CHECK(parse_regime("martingale") == Regime::martingale);
  }

  TEST_CASE("grids") {
    const GridAxis axes[] = {{0.0, 1.0, 3}, {-1.0, 1.0, 2}};
    const auto pts = tensor_grid(axes);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0] == std::vector<double>{0.0, -1.0});
    CHECK(pts[1] == std::vector<double>{0.0, 1.0});
    CHECK(pts[5] == std::vector<double>{1.0, 1.0});

    const auto flat = ctrans_grid(Payoff::constant(0.2, 2), CostSpec(2.0), Regime::unconstrained, axes);
    for (double v : flat.values) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));

    const GridAxis quake_axes[] = {{-2.0, 3.0, 11}, {-2.0, 3.0, 11}};
    const auto quake = ctrans_grid(Payoff::earthquake_default(), CostSpec(2.0), Regime::unconstrained, quake_axes);
    REQUIRE(quake.values.size() == 121);
    for (std::size_t i = 0; i < quake.values.size(); ++i) CHECK(quake.values[i] >= quake.payoff[i]);

    const GridAxis line[] = {{0.0, 3.0, 31}};
    const auto point = ctrans_grid(Payoff::bull_spread(0.9, 1.2), CostSpec(3.0, 1.0 / 12), Regime::martingale, line);
    for (std::size_t i = 0; i < point.points.size(); ++i) {
      CHECK(point.values[i] == ctrans_martingale(Payoff::bull_spread(0.9, 1.2), CostSpec(3.0, 1.0 / 12), point.points[i]));
    }
  }
}

TEST_SUITE("parametric") {
  TEST_CASE("gauss-hermite rule integrates normal moments") {
    const auto rule = gauss_hermite(64);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0, m3 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double z = rule.nodes[i], w = rule.weights[i];
      m0 += w;
      m2 += w * z * z;
      m3 += w * z * z * z;
      m4 += w * std::pow(z, 4);
      m6 += w * std::pow(z, 6);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m3) < 1e-12);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(m6 == doctest::Approx(15.0).epsilon(1e-10));
  }

  TEST_CASE("parametric examples") {
    const Payoff lin = Payoff::affine({1.0}, 0.0);
    for (double x : {-0.5, 0.0, 1.5}) {
      CHECK(ctrans_parametric(lin, x, ScalarPenalty::linear(1.0), ScalarPenalty::zero_only()) ==
            doctest::Approx(x + 0.25).epsilon(1e-6));
    }
    const Payoff bull = Payoff::bull_spread(0.9, 1.2);
    const auto sol = solve_parametric(bull, 1.0, ScalarPenalty::linear(1.0), ScalarPenalty::linear(1.0));
    CHECK(sol.value >= 0.1 - 1e-12);
    CHECK(sol.spread >= 0.0);
  }

  TEST_CASE("penalties") {
    CHECK(ScalarPenalty::linear(2.0)(1.5) == 3.0);
    CHECK(ScalarPenalty::power(2.0, 2.0)(3.0) == 18.0);
    CHECK(ScalarPenalty::zero_only()(0.0) == 0.0);
    CHECK(std::isinf(ScalarPenalty::zero_only()(1e-12)));
  }
}

TEST_SUITE("envelopes") {
  TEST_CASE("affine and constant functions are their own envelopes") {
    const Payoff a = Payoff::affine({0.7}, -0.2);
    const auto up = concave_envelope_1d(a, -1.0, 2.0, 101);
    const auto lo = convex_envelope_1d(a, -1.0, 2.0, 101);
    const auto c = concave_envelope_1d(Payoff::constant(0.4, 1), 0.0, 1.0, 11);
    for (int i = 0; i <= 30; ++i) {
      const double x = -1.0 + 0.1 * i;
      CHECK(up(x) == doctest::Approx(a.eval(pt(x))).epsilon(1e-12));
      CHECK(lo(x) == doctest::Approx(a.eval(pt(x))).epsilon(1e-12));
    }
    CHECK(c(0.33) == doctest::Approx(0.4));
  }

  TEST_CASE("bull spread envelopes on [0, 3]") {
    const Payoff f = Payoff::bull_spread(0.9, 1.2);
    const auto up = concave_envelope_1d(f, 0.0, 3.0, 3001);
    const auto lo = convex_envelope_1d(f, 0.0, 3.0, 3001);
    for (int i = 0; i <= 300; ++i) {
      const double x = 0.01 * i;
      CHECK(up(x) == doctest::Approx(0.25 * std::min(x, 1.2)).epsilon(1e-12));
      // The lower hull is the chord from the first kink to the far end.
      const double chord = x <= 0.9 ? 0.0 : 0.3 * (x - 0.9) / 2.1;
      CHECK(lo(x) == doctest::Approx(chord).epsilon(1e-12));
    }
    CHECK(lo(1.0) == doctest::Approx(1.0 / 70.0));
  }

  TEST_CASE("malformed envelopes") {
    CHECK_THROWS_AS(concave_envelope_1d(Payoff::bull_spread(0.9, 1.2), 1.0, 0.0, 10), ArgumentError);
    CHECK_THROWS_AS(concave_envelope_1d(Payoff::max_call(1.0, 2), 0.0, 1.0, 10), ArgumentError);
    CHECK_THROWS_AS(PiecewiseLinear({0.0, 1.0}, {1.0}), ArgumentError);
  }
}

TEST_SUITE("black scholes") {
  TEST_CASE("reference values") {
    CHECK(bs_call(1.0, 1.0, 0.2, 0.5) == doctest::Approx(0.0563719778).epsilon(1e-9));
    CHECK(bs_call(1.0, 1e-12, 0.2, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bs_call(1.0, 0.0, 0.2, 0.5) == 1.0);
    CHECK(bs_call(1.0, 0.9, 0.0, 0.5) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(bs_call(1.0, 0.9, 1e-9, 0.5) == doctest::Approx(0.1).epsilon(1e-9));
    const double c = bs_call(1.0, 1.2, 0.2, 0.5);
    CHECK(c > 0.0);
    CHECK(c < bs_call(1.0, 0.9, 0.2, 0.5));
  }

  TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double x : {-6.0, -2.5, -1.0, 0.3, 1.7, 4.0}) {
      CHECK(std::abs(normal_cdf(x) - 0.5 * std::erfc(-x / std::sqrt(2.0))) < 1e-14);
    }
  }
}
