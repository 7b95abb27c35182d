#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wot/costs.hpp"
#include "wot/payoffs.hpp"

namespace wot {

enum class Regime { unconstrained, martingale };

std::string to_string(Regime r);
/// Accepts "unconstrained" or "martingale"; throws ArgumentError otherwise.
Regime parse_regime(std::string_view s);

/// Tuning for the pointwise solvers and the dense-scan oracle.
struct SearchConfig {
  int starts = 16;
  double radius0 = 1.0;
  int max_radius_doublings = 8;
  double step_tol = 1e-8;
  int grid_points = 2001;  // per axis, oracle mode only
  double p_clip = 1e-4;    // martingale weight stays in [p_clip, 1 - p_clip]
  int max_evals = 4000;    // per simplex run
  /// Lower bound on every coordinate of every candidate point (e.g. 0 for
  /// asset prices). Unset means the whole space.
  std::optional<double> floor;

  void validate() const;
};

struct UnconstrainedSolution {
  double value = 0.0;
  std::vector<double> displacement;
};

/// Optimal two-point kernel p*delta_up + (1-p)*delta_down with mean x.
struct MartingaleSolution {
  double value = 0.0;
  std::vector<double> displacement;  // up - x
  double weight = 0.5;               // p
  std::vector<double> up;
  std::vector<double> down;
  double barycenter_residual = 0.0;  // max-norm of p*up + (1-p)*down - x
};

/// sup_y f(x + y) - c(|y|). Throws GrowthError when check_growth fails.
UnconstrainedSolution solve_unconstrained(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                                          const SearchConfig& cfg = {});
double ctrans_unconstrained(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                            const SearchConfig& cfg = {});

/// sup over (y, p) of p [f(x+y) - c(|y|)] + (1-p) [f(x - p/(1-p) y) - c(p/(1-p) |y|)].
MartingaleSolution solve_martingale(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                                    const SearchConfig& cfg = {});
double ctrans_martingale(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                         const SearchConfig& cfg = {});

double ctrans(const Payoff& f, const CostSpec& cost, Regime regime, std::span<const double> x,
              const SearchConfig& cfg = {});

/// Nondecreasing penalty on [0, inf) vanishing at 0.
class ScalarPenalty {
 public:
  enum class Kind { linear, power, zero_only };

  /// coefficient * u
  static ScalarPenalty linear(double coefficient);
  /// coefficient * u^exponent
  static ScalarPenalty power(double coefficient, double exponent);
  /// 0 at u == 0, +inf elsewhere.
  static ScalarPenalty zero_only();

  double operator()(double u) const;
  Kind kind() const { return kind_; }

 private:
  ScalarPenalty(Kind kind, double coefficient, double exponent)
      : kind_(kind), coefficient_(coefficient), exponent_(exponent) {}
  Kind kind_;
  double coefficient_;
  double exponent_;
};

/// Probabilists' Gauss-Hermite rule: sum_i w_i g(z_i) ~ E[g(Z)], Z ~ N(0,1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

struct ParametricSolution {
  double value = 0.0;
  double location = 0.0;  // m
  double spread = 0.0;    // sigma
};

/// sup over (m, sigma >= 0) of E[f(m + sigma Z)] - location(|m - x|^2) - spread(sigma^2)
/// for a one-dimensional payoff, with the expectation by Gauss-Hermite
/// quadrature on `nodes` points.
ParametricSolution solve_parametric(const Payoff& f, double x, const ScalarPenalty& location,
                                    const ScalarPenalty& spread, int nodes = 64,
                                    const SearchConfig& cfg = {});
double ctrans_parametric(const Payoff& f, double x, const ScalarPenalty& location, const ScalarPenalty& spread,
                         int nodes = 64, const SearchConfig& cfg = {});

/// Dense scan of a one-dimensional transform over displacements in
/// [-radius, radius] on cfg.grid_points points. For the martingale regime the
/// scan enumerates all pairs (down, up) of grid points with down < x < up.
double ctrans_oracle_1d(const Payoff& f, const CostSpec& cost, Regime regime, double x, double radius,
                        const SearchConfig& cfg = {});

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
};

enum class TransformMethod { pointwise, network, oracle };
std::string to_string(TransformMethod m);

struct CTransformGrid {
  std::vector<std::vector<double>> points;  // row-major over the axes, last axis fastest
  std::vector<double> payoff;
  std::vector<double> values;
  TransformMethod method = TransformMethod::pointwise;
  Regime regime = Regime::unconstrained;
  std::string payoff_id;
  std::string cost_id;
};

/// Tensor grid of points, last axis varying fastest.
std::vector<std::vector<double>> tensor_grid(std::span<const GridAxis> axes);

/// Pointwise (or, for one-dimensional payoffs, oracle) transform over a
/// tensor grid. Solves are independent; results are stored by grid index.
CTransformGrid ctrans_grid(const Payoff& f, const CostSpec& cost, Regime regime, std::span<const GridAxis> axes,
                           const SearchConfig& cfg = {}, TransformMethod method = TransformMethod::pointwise);

std::string cost_id(const CostSpec& cost);

}  // namespace wot
