#include "wot/costs.hpp"

#include <cmath>

#include "wot/error.hpp"

namespace wot {

CostSpec::CostSpec(double power, std::optional<double> timescale, double scale)
    : power_(power), timescale_(timescale), scale_(scale) {
  if (!(power >= 1.0) || !std::isfinite(power)) throw ArgumentError("cost power must be >= 1");
  if (timescale && (!(*timescale > 0.0) || !std::isfinite(*timescale)))
    throw ArgumentError("cost timescale must be positive");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ArgumentError("cost scale must be >= 0");
  coefficient_ = scale_;
  if (timescale_) coefficient_ *= std::pow(*timescale_, 1.0 - 0.5 * power_);
}

double CostSpec::cost_unchecked(double v) const {
  if (power_ == 2.0) return coefficient_ * v * v;
  if (power_ == 3.0) return coefficient_ * v * v * v;
  if (power_ == 1.0) return coefficient_ * v;
  return coefficient_ * std::pow(v, power_);
}

double CostSpec::deriv_unchecked(double v) const {
  if (power_ == 2.0) return 2.0 * coefficient_ * v;
  if (power_ == 3.0) return 3.0 * coefficient_ * v * v;
  if (power_ == 1.0) return coefficient_;
  return coefficient_ * power_ * std::pow(v, power_ - 1.0);
}

double CostSpec::cost(double v) const {
  if (!(v >= 0.0)) throw ArgumentError("cost argument must be >= 0");
  return cost_unchecked(v);
}

double CostSpec::deriv(double v) const {
  if (!(v >= 0.0)) throw ArgumentError("cost argument must be >= 0");
  return deriv_unchecked(v);
}

}  // namespace wot
