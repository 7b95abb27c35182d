#include "wot/black_scholes.hpp"

#include <algorithm>
#include <cmath>

#include "wot/error.hpp"

namespace wot {

double normal_cdf(double x) {
  const double z = std::abs(x);
  double tail = 0.0;
  if (z <= 37.0) {
    const double e = std::exp(-0.5 * z * z);
    if (z < 7.07106781186547) {
      double num = 3.52624965998911e-02 * z + 0.700383064443688;
      num = num * z + 6.37396220353165;
      num = num * z + 33.912866078383;
      num = num * z + 112.079291497871;
      num = num * z + 221.213596169931;
      num = num * z + 220.206867912376;
      double den = 8.83883476483184e-02 * z + 1.75566716318264;
      den = den * z + 16.064177579207;
      den = den * z + 86.7807322029461;
      den = den * z + 296.564248779674;
      den = den * z + 637.333633378831;
      den = den * z + 793.826512519948;
      den = den * z + 440.413735824752;
      tail = e * num / den;
    } else {
      double cf = z + 0.65;
      cf = z + 4.0 / cf;
      cf = z + 3.0 / cf;
      cf = z + 2.0 / cf;
      cf = z + 1.0 / cf;
      tail = e / cf / 2.506628274631;
    }
  }
  return x > 0.0 ? 1.0 - tail : tail;
}

double bs_call(double spot, double strike, double vol, double maturity) {
  if (!(spot > 0.0) || !(strike >= 0.0) || !(vol >= 0.0) || !(maturity >= 0.0))
    throw ArgumentError("bs_call requires positive spot and nonnegative strike, vol, maturity");
  if (strike == 0.0) return spot;
  const double sd = vol * std::sqrt(maturity);
  if (sd == 0.0) return std::max(spot - strike, 0.0);
  const double d1 = std::log(spot / strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  return spot * normal_cdf(d1) - strike * normal_cdf(d2);
}

}  // namespace wot
