#include "wot/envelope.hpp"

#include <algorithm>

#include "wot/error.hpp"

namespace wot {

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || xs_.size() != ys_.size()) throw ArgumentError("piecewise-linear knots and values mismatch");
  if (!std::is_sorted(xs_.begin(), xs_.end())) throw ArgumentError("piecewise-linear knots must be sorted");
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + w * (ys_[hi] - ys_[lo]);
}

namespace {

// Monotone-chain hull over points sorted by x. sign = +1 keeps the upper
// hull, -1 the lower hull.
PiecewiseLinear hull(const Payoff& f, double lo, double hi, int n, double sign) {
  if (f.dim() != 1) throw ArgumentError("envelope requires a one-dimensional payoff");
  if (n < 3) throw ArgumentError("envelope grid needs at least 3 points");
  if (!(hi > lo)) throw ArgumentError("envelope domain must have hi > lo");
  std::vector<double> hx, hy;
  hx.reserve(static_cast<std::size_t>(n));
  hy.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    const double y = sign * f.eval(std::span<const double>(&x, 1));
    // Drop the last hull point while it lies on or below the chord.
    while (hx.size() >= 2) {
      const std::size_t k = hx.size();
      const double cross = (hx[k - 1] - hx[k - 2]) * (y - hy[k - 2]) - (hy[k - 1] - hy[k - 2]) * (x - hx[k - 2]);
      if (cross >= 0.0) {
        hx.pop_back();
        hy.pop_back();
      } else {
        break;
      }
    }
    hx.push_back(x);
    hy.push_back(y);
  }
  for (auto& v : hy) v *= sign;
  return PiecewiseLinear(std::move(hx), std::move(hy));
}

}  // namespace

PiecewiseLinear concave_envelope_1d(const Payoff& f, double lo, double hi, int n) { return hull(f, lo, hi, n, 1.0); }

PiecewiseLinear convex_envelope_1d(const Payoff& f, double lo, double hi, int n) { return hull(f, lo, hi, n, -1.0); }

}  // namespace wot
