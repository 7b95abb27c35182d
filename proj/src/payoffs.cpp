#include "wot/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wot/costs.hpp"
#include "wot/error.hpp"

namespace wot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(what) + " must be positive");
}

void require_dim(int dim) {
  if (dim < 1) throw ArgumentError("payoff dimension must be >= 1");
}

}  // namespace

Payoff Payoff::bull_spread(double k1, double k2) {
  require_positive(k1, "bull spread K1");
  if (!(k2 > k1) || !std::isfinite(k2)) throw ArgumentError("bull spread requires 0 < K1 < K2");
  return Payoff(BullSpread{k1, k2}, 1, {k2 - k1, 0.0, 0.0});
}

Payoff Payoff::max_call(double strike, int dim) {
  require_positive(strike, "max call strike");
  require_dim(dim);
  return Payoff(MaxCall{strike}, dim, {0.0, 1.0, 1.0});
}

Payoff Payoff::basket_call(double strike, int dim) {
  require_positive(strike, "basket call strike");
  require_dim(dim);
  return Payoff(BasketCall{strike}, dim, {0.0, 1.0 / std::sqrt(static_cast<double>(dim)), 1.0});
}

Payoff Payoff::min_put(double strike, int dim) {
  require_positive(strike, "min put strike");
  require_dim(dim);
  return Payoff(MinPut{strike}, dim, {strike, 1.0, 1.0});
}

Payoff Payoff::geometric_put(double strike, int dim) {
  require_positive(strike, "geometric put strike");
  require_dim(dim);
  return Payoff(GeometricPut{strike}, dim, {strike, 0.0, 0.0});
}

Payoff Payoff::affine(std::vector<double> slope, double intercept) {
  if (slope.empty()) throw ArgumentError("affine payoff needs a slope of dimension >= 1");
  double norm = 0.0;
  for (double a : slope) norm += a * a;
  norm = std::sqrt(norm);
  const int dim = static_cast<int>(slope.size());
  const GrowthBound g = norm == 0.0 ? GrowthBound{std::abs(intercept), 0.0, 0.0}
                                    : GrowthBound{std::abs(intercept), norm, 1.0};
  return Payoff(Affine{std::move(slope), intercept}, dim, g);
}

Payoff Payoff::constant(double value, int dim) {
  require_dim(dim);
  return affine(std::vector<double>(static_cast<std::size_t>(dim), 0.0), value);
}

Payoff Payoff::quadratic(double coefficient, int dim) {
  require_dim(dim);
  return Payoff(Quadratic{coefficient}, dim, {0.0, std::abs(coefficient), coefficient == 0.0 ? 0.0 : 2.0});
}

Payoff Payoff::earthquake(std::vector<Bump> bumps) {
  if (bumps.empty()) throw ArgumentError("earthquake loss needs at least one bump");
  const std::size_t dim = bumps.front().center.size();
  if (dim == 0) throw ArgumentError("bump centers must have dimension >= 1");
  double total = 0.0;
  for (const auto& b : bumps) {
    if (b.center.size() != dim) throw ArgumentError("bump centers must share one dimension");
    require_positive(b.amplitude, "bump amplitude");
    require_positive(b.width, "bump width");
    total += b.amplitude;
  }
  return Payoff(EarthquakeLoss{std::move(bumps)}, static_cast<int>(dim), {total, 0.0, 0.0});
}

Payoff Payoff::earthquake_default() {
  return earthquake({Bump{{0.0, 0.0}, 1.0, 0.5}, Bump{{1.5, 0.5}, 0.6, 0.3}});
}

Payoff Payoff::scaled(const Payoff& f, double weight) {
  auto terms = std::make_shared<std::vector<Combination::Term>>();
  terms->push_back({weight, f});
  const GrowthBound& g = f.growth_;
  const double w = std::abs(weight);
  return Payoff(Combination{std::move(terms), 0.0}, f.dim_, {w * g.constant, w * g.coefficient, g.order});
}

Payoff Payoff::shifted(const Payoff& f, double m) {
  auto terms = std::make_shared<std::vector<Combination::Term>>();
  terms->push_back({1.0, f});
  GrowthBound g = f.growth_;
  g.constant += std::abs(m);
  return Payoff(Combination{std::move(terms), m}, f.dim_, g);
}

Payoff Payoff::mixture(const Payoff& f, const Payoff& g, double lambda) {
  if (f.dim_ != g.dim_) throw ArgumentError("mixture of payoffs with different dimensions");
  auto terms = std::make_shared<std::vector<Combination::Term>>();
  terms->push_back({lambda, f});
  terms->push_back({1.0 - lambda, g});
  const double a = std::abs(lambda);
  const double b = std::abs(1.0 - lambda);
  GrowthBound out;
  out.constant = a * f.growth_.constant + b * g.growth_.constant;
  out.order = std::max(f.growth_.order, g.growth_.order);
  if (f.growth_.order == out.order) out.coefficient += a * f.growth_.coefficient;
  if (g.growth_.order == out.order) out.coefficient += b * g.growth_.coefficient;
  // A lower-order term still contributes at |x| <= 1; fold its coefficient
  // into the constant.
  if (f.growth_.order < out.order) out.constant += a * f.growth_.coefficient;
  if (g.growth_.order < out.order) out.constant += b * g.growth_.coefficient;
  return Payoff(Combination{std::move(terms), 0.0}, f.dim_, out);
}

Payoff Payoff::with_growth(GrowthBound bound) const {
  Payoff out = *this;
  out.growth_ = bound;
  return out;
}

std::string Payoff::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const BullSpread& p) { os << "bull-spread(" << p.k1 << "," << p.k2 << ")"; },
                 [&](const MaxCall& p) { os << "max-call(" << p.strike << ")"; },
                 [&](const BasketCall& p) { os << "basket-call(" << p.strike << ")"; },
                 [&](const MinPut& p) { os << "min-put(" << p.strike << ")"; },
                 [&](const GeometricPut& p) { os << "geometric-put(" << p.strike << ")"; },
                 [&](const Affine& p) { os << "affine(b=" << p.intercept << ")"; },
                 [&](const Quadratic& p) { os << "quadratic(" << p.coefficient << ")"; },
                 [&](const EarthquakeLoss& p) { os << "earthquake(" << p.bumps.size() << " bumps)"; },
                 [&](const Combination& p) {
                   os << "combination(";
                   for (std::size_t k = 0; k < p.terms->size(); ++k) {
                     if (k) os << "+";
                     os << (*p.terms)[k].weight << "*" << (*p.terms)[k].payoff.name();
                   }
                   os << "+" << p.constant << ")";
                 },
             },
             v_);
  return os.str();
}

void Payoff::check_dim(std::size_t n) const {
  if (n != static_cast<std::size_t>(dim_))
    throw ArgumentError("payoff " + name() + " expects dimension " + std::to_string(dim_) + ", got " +
                        std::to_string(n));
}

double Payoff::eval(std::span<const double> x) const {
  check_dim(x.size());
  return eval_unchecked(x.data());
}

void Payoff::grad(std::span<const double> x, std::span<double> out) const {
  check_dim(x.size());
  check_dim(out.size());
  grad_unchecked(x.data(), out.data());
}

std::vector<double> Payoff::grad(std::span<const double> x) const {
  std::vector<double> out(x.size());
  grad(x, out);
  return out;
}

double Payoff::eval_unchecked(const double* x) const {
  const int d = dim_;
  return std::visit(
      overloaded{
          [&](const BullSpread& p) {
            return std::max(x[0] - p.k1, 0.0) - std::max(x[0] - p.k2, 0.0);
          },
          [&](const MaxCall& p) { return std::max(*std::max_element(x, x + d) - p.strike, 0.0); },
          [&](const BasketCall& p) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += x[i];
            return std::max(s / d - p.strike, 0.0);
          },
          [&](const MinPut& p) { return std::max(p.strike - *std::min_element(x, x + d), 0.0); },
          [&](const GeometricPut& p) {
            double log_sum = 0.0;
            for (int i = 0; i < d; ++i) {
              if (x[i] <= 0.0) return p.strike;
              log_sum += std::log(x[i]);
            }
            return std::max(p.strike - std::exp(log_sum / d), 0.0);
          },
          [&](const Affine& p) {
            double s = p.intercept;
            for (int i = 0; i < d; ++i) s += p.slope[static_cast<std::size_t>(i)] * x[i];
            return s;
          },
          [&](const Quadratic& p) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += x[i] * x[i];
            return p.coefficient * s;
          },
          [&](const EarthquakeLoss& p) {
            double s = 0.0;
            for (const auto& b : p.bumps) {
              double r2 = 0.0;
              for (int i = 0; i < d; ++i) {
                const double dx = x[i] - b.center[static_cast<std::size_t>(i)];
                r2 += dx * dx;
              }
              s += b.amplitude * std::exp(-r2 / (2.0 * b.width * b.width));
            }
            return s;
          },
          [&](const Combination& p) {
            double s = p.constant;
            for (const auto& t : *p.terms) s += t.weight * t.payoff.eval_unchecked(x);
            return s;
          },
      },
      v_);
}

void Payoff::grad_unchecked(const double* x, double* out) const {
  const int d = dim_;
  std::fill(out, out + d, 0.0);
  std::visit(overloaded{
                 [&](const BullSpread& p) { out[0] = (x[0] >= p.k1 && x[0] < p.k2) ? 1.0 : 0.0; },
                 [&](const MaxCall& p) {
                   const auto it = std::max_element(x, x + d);
                   if (*it >= p.strike) out[it - x] = 1.0;
                 },
                 [&](const BasketCall& p) {
                   double s = 0.0;
                   for (int i = 0; i < d; ++i) s += x[i];
                   if (s / d >= p.strike) std::fill(out, out + d, 1.0 / d);
                 },
                 [&](const MinPut& p) {
                   const auto it = std::min_element(x, x + d);
                   if (*it < p.strike) out[it - x] = -1.0;
                 },
                 [&](const GeometricPut& p) {
                   double log_sum = 0.0;
                   for (int i = 0; i < d; ++i) {
                     if (x[i] <= 0.0) return;
                     log_sum += std::log(x[i]);
                   }
                   const double g = std::exp(log_sum / d);
                   if (g < p.strike)
                     for (int i = 0; i < d; ++i) out[i] = -g / (d * x[i]);
                 },
                 [&](const Affine& p) { std::copy(p.slope.begin(), p.slope.end(), out); },
                 [&](const Quadratic& p) {
                   for (int i = 0; i < d; ++i) out[i] = 2.0 * p.coefficient * x[i];
                 },
                 [&](const EarthquakeLoss& p) {
                   for (const auto& b : p.bumps) {
                     double r2 = 0.0;
                     for (int i = 0; i < d; ++i) {
                       const double dx = x[i] - b.center[static_cast<std::size_t>(i)];
                       r2 += dx * dx;
                     }
                     const double w2 = b.width * b.width;
                     const double e = b.amplitude * std::exp(-r2 / (2.0 * w2));
                     for (int i = 0; i < d; ++i) out[i] -= e * (x[i] - b.center[static_cast<std::size_t>(i)]) / w2;
                   }
                 },
                 [&](const Combination& p) {
                   std::vector<double> part(static_cast<std::size_t>(d));
                   for (const auto& t : *p.terms) {
                     t.payoff.grad_unchecked(x, part.data());
                     for (int i = 0; i < d; ++i) out[i] += t.weight * part[static_cast<std::size_t>(i)];
                   }
                 },
             },
             v_);
}

bool check_growth(const Payoff& f, const CostSpec& cost) {
  const GrowthBound& g = f.growth();
  if (!std::isfinite(g.constant) || !std::isfinite(g.coefficient) || g.coefficient < 0.0) return false;
  if (g.order == 0.0 || g.coefficient == 0.0) return true;
  const double coef = cost.coefficient();
  if (coef == 0.0) return false;
  if (g.order > cost.power()) return false;
  if (g.order < cost.power()) return true;
  return g.coefficient < coef;
}

}  // namespace wot
