#pragma once

#include <vector>

#include "wot/payoffs.hpp"

namespace wot {

/// Continuous piecewise-linear function through (xs[i], ys[i]); arguments
/// outside [xs.front(), xs.back()] are clamped to the domain.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;
  const std::vector<double>& knots() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Upper concave hull of {(x_i, f(x_i))} on n equispaced points of [lo, hi].
PiecewiseLinear concave_envelope_1d(const Payoff& f, double lo, double hi, int n);
/// Lower convex hull of {(x_i, f(x_i))} on n equispaced points of [lo, hi].
PiecewiseLinear convex_envelope_1d(const Payoff& f, double lo, double hi, int n);

}  // namespace wot
