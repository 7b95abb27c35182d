#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wot {

class CostSpec;

/// Declared bound |f(x)| <= constant + coefficient * |x|^order.
struct GrowthBound {
  double constant = 0.0;
  double coefficient = 0.0;
  double order = 0.0;
};

struct BullSpread {
  double k1 = 0.9;
  double k2 = 1.2;
};
struct MaxCall {
  double strike = 1.0;
};
struct BasketCall {
  double strike = 1.0;
};
struct MinPut {
  double strike = 1.0;
};
/// Negative coordinates are clamped to zero before the geometric mean.
struct GeometricPut {
  double strike = 1.0;
};
struct Affine {
  std::vector<double> slope;
  double intercept = 0.0;
};
/// coefficient * |x|^2
struct Quadratic {
  double coefficient = 0.0;
};
struct Bump {
  std::vector<double> center;
  double amplitude = 1.0;
  double width = 1.0;
};
/// Sum of Gaussian bumps: sum_j a_j exp(-|x - c_j|^2 / (2 w_j^2)).
struct EarthquakeLoss {
  std::vector<Bump> bumps;
};

class Payoff;

/// constant + sum_k weight_k * payoff_k
struct Combination {
  struct Term;
  std::shared_ptr<const std::vector<Term>> terms;
  double constant = 0.0;
};

/// Loss or payoff function of a fixed input dimension. Immutable value type;
/// eval and grad are pure.
class Payoff {
 public:
  using Variant = std::variant<BullSpread, MaxCall, BasketCall, MinPut, GeometricPut, Affine,
                               Quadratic, EarthquakeLoss, Combination>;

  static Payoff bull_spread(double k1, double k2);
  static Payoff max_call(double strike, int dim);
  static Payoff basket_call(double strike, int dim);
  static Payoff min_put(double strike, int dim);
  static Payoff geometric_put(double strike, int dim);
  static Payoff affine(std::vector<double> slope, double intercept);
  static Payoff constant(double value, int dim);
  static Payoff quadratic(double coefficient, int dim);
  static Payoff earthquake(std::vector<Bump> bumps);
  /// Two bumps at (0,0) and (1.5,0.5) with amplitudes 1.0, 0.6 and widths 0.5, 0.3.
  static Payoff earthquake_default();

  /// weight * f
  static Payoff scaled(const Payoff& f, double weight);
  /// f + m
  static Payoff shifted(const Payoff& f, double m);
  /// lambda * f + (1 - lambda) * g
  static Payoff mixture(const Payoff& f, const Payoff& g, double lambda);

  int dim() const { return dim_; }
  const Variant& variant() const { return v_; }
  std::string name() const;

  const GrowthBound& growth() const { return growth_; }
  /// Replaces the declared growth bound.
  Payoff with_growth(GrowthBound bound) const;

  double eval(std::span<const double> x) const;
  /// Almost-everywhere gradient. At kinks the right-branch element is used.
  void grad(std::span<const double> x, std::span<double> out) const;
  std::vector<double> grad(std::span<const double> x) const;

  // Hot-loop variants without the dimension check; x holds dim() values.
  double eval_unchecked(const double* x) const;
  void grad_unchecked(const double* x, double* out) const;

 private:
  Payoff(Variant v, int dim, GrowthBound growth) : v_(std::move(v)), dim_(dim), growth_(growth) {}
  void check_dim(std::size_t n) const;

  Variant v_;
  int dim_ = 1;
  GrowthBound growth_;
};

struct Combination::Term {
  double weight;
  Payoff payoff;
};

/// True when the declared growth of f is dominated by the cost, i.e. the
/// objective f(y) - c(|y - x|) is bounded above:
///   order 0 (bounded)                      -> always true;
///   zero cost coefficient                  -> only bounded payoffs;
///   order < p                              -> true;
///   order == p                             -> coefficient < cost coefficient (< 1 at unit scale);
///   order > p                              -> false.
bool check_growth(const Payoff& f, const CostSpec& cost);

}  // namespace wot
