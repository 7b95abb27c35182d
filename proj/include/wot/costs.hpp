#pragma once

#include <optional>

namespace wot {

/// Radial power cost c(v) = scale * v^p, optionally time scaled as
/// c_t(v) = t * c(v / sqrt(t)) = scale * t^(1 - p/2) * v^p.
class CostSpec {
 public:
  explicit CostSpec(double power, std::optional<double> timescale = std::nullopt, double scale = 1.0);

  double power() const { return power_; }
  std::optional<double> timescale() const { return timescale_; }
  double scale() const { return scale_; }
  /// Multiplier in front of v^p after time scaling.
  double coefficient() const { return coefficient_; }

  /// Throws ArgumentError for v < 0.
  double cost(double v) const;
  /// d/dv cost. For p == 1 the value at v == 0 is the right derivative.
  double deriv(double v) const;

  // Hot-loop variants; v must be >= 0.
  double cost_unchecked(double v) const;
  double deriv_unchecked(double v) const;

  /// Same cost with a different timescale.
  CostSpec at_time(double t) const { return CostSpec(power_, t, scale_); }

 private:
  double power_;
  std::optional<double> timescale_;
  double scale_;
  double coefficient_;
};

}  // namespace wot
