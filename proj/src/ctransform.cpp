#include "wot/ctransform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wot/error.hpp"
#include "wot/parallel.hpp"
#include "wot/rng.hpp"
#include "wot/simplex.hpp"

namespace wot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kScanBudget = 4096;
constexpr double kCoarseTolFactor = 1e-3;
constexpr std::uint64_t kScanSeed = 0x7363616e;  // fixed so pointwise solves are deterministic

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

// Coarse candidate set for one radius: either a tensor grid (with neighbor
// structure for local-maximum detection) or scattered points.
struct Scan {
  std::vector<std::vector<double>> axes;  // empty for scattered scans
  std::vector<std::vector<double>> points;
  std::vector<double> steps;              // initial simplex step per coordinate
};

Scan tensor_scan(std::vector<std::vector<double>> axes) {
  Scan scan;
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  const std::size_t dims = axes.size();
  scan.points.reserve(total);
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> p(dims);
    for (std::size_t k = 0; k < dims; ++k) p[k] = axes[k][idx[k]];
    scan.points.push_back(std::move(p));
    for (std::size_t k = dims; k-- > 0;) {
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
    }
  }
  for (const auto& a : axes) scan.steps.push_back(a.size() > 1 ? (a.back() - a.front()) / (a.size() - 1) : 0.1);
  scan.axes = std::move(axes);
  return scan;
}

// Indices of scan points to refine: grid local maxima for tensor scans, all
// points otherwise; best `starts` by value. A point tied with a lower-index
// neighbor is skipped, so each plateau contributes a single start.
std::vector<std::size_t> pick_starts(const Scan& scan, const std::vector<double>& vals, int starts) {
  std::vector<std::size_t> cand;
  if (scan.axes.empty()) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      if (vals[i] > kNegInf) cand.push_back(i);
  } else {
    const std::size_t dims = scan.axes.size();
    std::vector<std::size_t> stride(dims, 1);
    for (std::size_t k = dims - 1; k-- > 0;) stride[k] = stride[k + 1] * scan.axes[k + 1].size();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!(vals[i] > kNegInf)) continue;
      bool is_max = true;
      for (std::size_t k = 0; k < dims && is_max; ++k) {
        const std::size_t pos = (i / stride[k]) % scan.axes[k].size();
        if (pos > 0 && vals[i - stride[k]] >= vals[i]) is_max = false;
        if (pos + 1 < scan.axes[k].size() && vals[i + stride[k]] > vals[i]) is_max = false;
      }
      if (is_max) cand.push_back(i);
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
  if (cand.size() > static_cast<std::size_t>(starts)) cand.resize(static_cast<std::size_t>(starts));
  return cand;
}

struct SearchResult {
  std::vector<double> theta;
  double value = kNegInf;
};

// Multi-start maximization: scan, refine the best local maxima by
// Nelder-Mead, and double the radius while the incumbent's first
// `radial_dims` coordinates sit within 1% of the scanned boundary.
template <class Objective, class MakeScan>
SearchResult multistart(Objective&& objective, MakeScan&& make_scan, std::vector<double> baseline,
                        std::size_t radial_dims, const SearchConfig& cfg) {
  SearchResult best{baseline, objective(std::span<const double>(baseline))};
  if (std::isnan(best.value)) best.value = kNegInf;
  double radius = cfg.radius0;
  double previous = kNegInf;
  for (int round = 0; round <= cfg.max_radius_doublings; ++round) {
    const Scan scan = make_scan(radius);
    std::vector<double> vals(scan.points.size());
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      const double v = objective(std::span<const double>(scan.points[i]));
      vals[i] = std::isnan(v) ? kNegInf : v;
      if (vals[i] > best.value) best = {scan.points[i], vals[i]};
    }
    std::vector<std::vector<double>> starts;
    for (std::size_t i : pick_starts(scan, vals, cfg.starts)) starts.push_back(scan.points[i]);
    starts.push_back(best.theta);
    // Every start is refined coarsely; only the winner is polished to step_tol.
    double coarse_scale = 0.0;
    for (double s : scan.steps) coarse_scale = std::max(coarse_scale, s);
    const double coarse_tol = std::max(cfg.step_tol, kCoarseTolFactor * coarse_scale);
    for (const auto& s : starts) {
      auto res = nelder_mead_maximize(objective, s, scan.steps, coarse_tol, cfg.max_evals);
      if (res.value > best.value) best = {std::move(res.x), res.value};
    }
    std::vector<double> fine_steps(scan.steps.size());
    for (std::size_t k = 0; k < fine_steps.size(); ++k) fine_steps[k] = std::max(scan.steps[k] * 1e-2, 10.0 * coarse_tol);
    auto polished = nelder_mead_maximize(objective, best.theta, fine_steps, cfg.step_tol, cfg.max_evals);
    if (polished.value > best.value) best = {std::move(polished.x), polished.value};
    double reach = 0.0;
    for (std::size_t k = 0; k < radial_dims; ++k) reach = std::max(reach, std::abs(best.theta[k]));
    if (reach < 0.99 * radius) break;
    // A boundary incumbent on a plateau gains nothing from a wider scan.
    if (best.value <= previous + 1e-12 * std::max(1.0, std::abs(previous))) break;
    previous = best.value;
    radius *= 2.0;
  }
  return best;
}

Scan scattered_scan(std::size_t radial_dims, double radius, const std::vector<double>& extra_lo,
                    const std::vector<double>& extra_hi) {
  Scan scan;
  Rng rng(kScanSeed);
  const std::size_t dims = radial_dims + extra_lo.size();
  scan.points.reserve(kScanBudget);
  for (int i = 0; i < kScanBudget; ++i) {
    std::vector<double> p(dims);
    for (std::size_t k = 0; k < radial_dims; ++k) p[k] = radius * (2.0 * rng.uniform() - 1.0);
    for (std::size_t k = 0; k < extra_lo.size(); ++k)
      p[radial_dims + k] = extra_lo[k] + (extra_hi[k] - extra_lo[k]) * rng.uniform();
    scan.points.push_back(std::move(p));
  }
  scan.steps.assign(dims, radius / 8.0);
  for (std::size_t k = 0; k < extra_lo.size(); ++k) scan.steps[radial_dims + k] = (extra_hi[k] - extra_lo[k]) / 8.0;
  return scan;
}

int unconstrained_axis_points(int d) {
  switch (d) {
    case 1: return 81;
    case 2: return 31;
    case 3: return 13;
    default: return 0;
  }
}

int martingale_axis_points(int d) {
  switch (d) {
    case 1: return 41;
    case 2: return 15;
    default: return 0;
  }
}

constexpr int kWeightAxisPoints = 9;
constexpr double kWeightLogitRange = 4.0;

bool below_floor(const SearchConfig& cfg, const double* pt, int d) {
  if (!cfg.floor) return false;
  for (int i = 0; i < d; ++i)
    if (pt[i] < *cfg.floor) return true;
  return false;
}

void require_growth(const Payoff& f, const CostSpec& cost) {
  if (!check_growth(f, cost))
    throw GrowthError("payoff " + f.name() + " is not dominated by cost " + cost_id(cost) +
                      "; the transform may be unbounded");
}

void require_dim(const Payoff& f, std::size_t n) {
  if (n != static_cast<std::size_t>(f.dim()))
    throw ArgumentError("point dimension " + std::to_string(n) + " does not match payoff dimension " +
                        std::to_string(f.dim()));
}

}  // namespace

std::string to_string(Regime r) { return r == Regime::unconstrained ? "unconstrained" : "martingale"; }

Regime parse_regime(std::string_view s) {
  if (s == "unconstrained") return Regime::unconstrained;
  if (s == "martingale") return Regime::martingale;
  throw ArgumentError("unknown regime: " + std::string(s));
}

std::string to_string(TransformMethod m) {
  switch (m) {
    case TransformMethod::pointwise: return "pointwise";
    case TransformMethod::network: return "network";
    case TransformMethod::oracle: return "oracle";
  }
  return "pointwise";
}

void SearchConfig::validate() const {
  if (starts < 1) throw ArgumentError("search starts must be >= 1");
  if (!(radius0 > 0.0)) throw ArgumentError("search radius0 must be positive");
  if (max_radius_doublings < 0) throw ArgumentError("max_radius_doublings must be >= 0");
  if (!(step_tol > 0.0)) throw ArgumentError("step_tol must be positive");
  if (grid_points < 3) throw ArgumentError("grid_points must be >= 3");
  if (!(p_clip > 0.0 && p_clip < 0.5)) throw ArgumentError("p_clip must lie in (0, 1/2)");
  if (max_evals < 10) throw ArgumentError("max_evals must be >= 10");
}

std::string cost_id(const CostSpec& cost) {
  std::ostringstream os;
  os << "power(p=" << cost.power();
  if (cost.timescale()) os << ",t=" << *cost.timescale();
  if (cost.scale() != 1.0) os << ",scale=" << cost.scale();
  os << ")";
  return os.str();
}

UnconstrainedSolution solve_unconstrained(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                                          const SearchConfig& cfg) {
  cfg.validate();
  require_dim(f, x.size());
  require_growth(f, cost);
  const int d = f.dim();
  std::vector<double> pt(static_cast<std::size_t>(d));

  auto objective = [&](std::span<const double> y) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      pt[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)];
      r2 += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    if (below_floor(cfg, pt.data(), d)) return kNegInf;
    return f.eval_unchecked(pt.data()) - cost.cost_unchecked(std::sqrt(r2));
  };
  auto make_scan = [&](double radius) {
    const int k = unconstrained_axis_points(d);
    if (k == 0) return scattered_scan(static_cast<std::size_t>(d), radius, {}, {});
    return tensor_scan(std::vector<std::vector<double>>(static_cast<std::size_t>(d), linspace(-radius, radius, k)));
  };
  auto best = multistart(objective, make_scan, std::vector<double>(static_cast<std::size_t>(d), 0.0),
                         static_cast<std::size_t>(d), cfg);
  return {best.value, std::move(best.theta)};
}

double ctrans_unconstrained(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                            const SearchConfig& cfg) {
  return solve_unconstrained(f, cost, x, cfg).value;
}

MartingaleSolution solve_martingale(const Payoff& f, const CostSpec& cost, std::span<const double> x,
                                    const SearchConfig& cfg) {
  cfg.validate();
  require_dim(f, x.size());
  require_growth(f, cost);
  const int d = f.dim();
  const auto du = static_cast<std::size_t>(d);
  const double eps = cfg.p_clip;
  std::vector<double> up(du), down(du);

  // With a floor, the weight is capped so that the far point stays on or
  // above it. A cap below the clip level marks the point infeasible.
  auto weight_of = [&](std::span<const double> theta) {
    double p = eps + (1.0 - 2.0 * eps) * logistic(theta[du]);
    if (!cfg.floor) return p;
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < du; ++i)
      if (theta[i] > 0.0) cap = std::min(cap, (x[i] - *cfg.floor) / theta[i]);
    if (cap < std::numeric_limits<double>::infinity()) p = std::min(p, cap / (1.0 + cap));
    return p < eps ? -1.0 : p;
  };
  auto objective = [&](std::span<const double> theta) {
    const double p = weight_of(theta);
    if (p < 0.0) return kNegInf;
    const double ratio = p / (1.0 - p);
    double r2 = 0.0;
    for (std::size_t i = 0; i < du; ++i) {
      up[i] = x[i] + theta[i];
      down[i] = x[i] - ratio * theta[i];
      if (cfg.floor) down[i] = std::max(down[i], *cfg.floor);
      r2 += theta[i] * theta[i];
    }
    if (below_floor(cfg, up.data(), d) || below_floor(cfg, down.data(), d)) return kNegInf;
    const double r = std::sqrt(r2);
    return p * (f.eval_unchecked(up.data()) - cost.cost_unchecked(r)) +
           (1.0 - p) * (f.eval_unchecked(down.data()) - cost.cost_unchecked(ratio * r));
  };
  auto make_scan = [&](double radius) {
    const int k = martingale_axis_points(d);
    if (k == 0) return scattered_scan(du, radius, {-kWeightLogitRange}, {kWeightLogitRange});
    std::vector<std::vector<double>> axes(du, linspace(-radius, radius, k));
    axes.push_back(linspace(-kWeightLogitRange, kWeightLogitRange, kWeightAxisPoints));
    return tensor_scan(std::move(axes));
  };
  auto best = multistart(objective, make_scan, std::vector<double>(du + 1, 0.0), du, cfg);

  MartingaleSolution sol;
  sol.value = best.value;
  sol.weight = std::max(weight_of(best.theta), 0.0);
  const double ratio = sol.weight / (1.0 - sol.weight);
  sol.displacement.assign(best.theta.begin(), best.theta.begin() + d);
  sol.up.resize(du);
  sol.down.resize(du);
  for (std::size_t i = 0; i < du; ++i) {
    sol.up[i] = x[i] + sol.displacement[i];
    sol.down[i] = x[i] - ratio * sol.displacement[i];
    if (cfg.floor) sol.down[i] = std::max(sol.down[i], *cfg.floor);
    sol.barycenter_residual =
        std::max(sol.barycenter_residual, std::abs(sol.weight * sol.up[i] + (1.0 - sol.weight) * sol.down[i] - x[i]));
  }
  return sol;
}

double ctrans_martingale(const Payoff& f, const CostSpec& cost, std::span<const double> x, const SearchConfig& cfg) {
  return solve_martingale(f, cost, x, cfg).value;
}

double ctrans(const Payoff& f, const CostSpec& cost, Regime regime, std::span<const double> x,
              const SearchConfig& cfg) {
  return regime == Regime::unconstrained ? ctrans_unconstrained(f, cost, x, cfg) : ctrans_martingale(f, cost, x, cfg);
}

ScalarPenalty ScalarPenalty::linear(double coefficient) {
  if (!(coefficient >= 0.0)) throw ArgumentError("penalty coefficient must be >= 0");
  return ScalarPenalty(Kind::linear, coefficient, 1.0);
}

ScalarPenalty ScalarPenalty::power(double coefficient, double exponent) {
  if (!(coefficient >= 0.0)) throw ArgumentError("penalty coefficient must be >= 0");
  if (!(exponent > 0.0)) throw ArgumentError("penalty exponent must be positive");
  return ScalarPenalty(Kind::power, coefficient, exponent);
}

ScalarPenalty ScalarPenalty::zero_only() { return ScalarPenalty(Kind::zero_only, 0.0, 0.0); }

double ScalarPenalty::operator()(double u) const {
  switch (kind_) {
    case Kind::linear: return coefficient_ * u;
    case Kind::power: return coefficient_ * std::pow(u, exponent_);
    case Kind::zero_only: return u == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ArgumentError("Gauss-Hermite rule needs at least one node");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(eig.eigenvalues()(i));
    rule.weights.push_back(eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i));
  }
  // Symmetrize: the rule is exact for odd moments only with symmetric nodes.
  for (int i = 0; i < n / 2; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    const double node = 0.5 * (rule.nodes[b] - rule.nodes[a]);
    const double weight = 0.5 * (rule.weights[a] + rule.weights[b]);
    rule.nodes[a] = -node;
    rule.nodes[b] = node;
    rule.weights[a] = rule.weights[b] = weight;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

ParametricSolution solve_parametric(const Payoff& f, double x, const ScalarPenalty& location,
                                    const ScalarPenalty& spread, int nodes, const SearchConfig& cfg) {
  cfg.validate();
  if (f.dim() != 1) throw ArgumentError("parametric transform requires a one-dimensional payoff");
  const GaussHermiteRule rule = gauss_hermite(nodes);
  const bool fixed_spread = spread.kind() == ScalarPenalty::Kind::zero_only;

  auto expectation = [&](double m, double sigma) {
    if (sigma == 0.0) return f.eval_unchecked(&m);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double pt = m + sigma * rule.nodes[i];
      acc += rule.weights[i] * f.eval_unchecked(&pt);
    }
    return acc;
  };
  // theta = (m - x[, sigma]); sigma enters through |theta[1]|.
  auto objective = [&](std::span<const double> theta) {
    const double sigma = fixed_spread ? 0.0 : std::abs(theta[1]);
    const double pen = location(theta[0] * theta[0]) + spread(sigma * sigma);
    if (!std::isfinite(pen)) return kNegInf;
    return expectation(x + theta[0], sigma) - pen;
  };
  auto make_scan = [&](double radius) {
    std::vector<std::vector<double>> axes{linspace(-radius, radius, 41)};
    if (!fixed_spread) axes.push_back(linspace(0.0, radius, 21));
    return tensor_scan(std::move(axes));
  };
  const std::size_t dims = fixed_spread ? 1 : 2;
  auto best = multistart(objective, make_scan, std::vector<double>(dims, 0.0), dims, cfg);
  return {best.value, x + best.theta[0], fixed_spread ? 0.0 : std::abs(best.theta[1])};
}

double ctrans_parametric(const Payoff& f, double x, const ScalarPenalty& location, const ScalarPenalty& spread,
                         int nodes, const SearchConfig& cfg) {
  return solve_parametric(f, x, location, spread, nodes, cfg).value;
}

double ctrans_oracle_1d(const Payoff& f, const CostSpec& cost, Regime regime, double x, double radius,
                        const SearchConfig& cfg) {
  cfg.validate();
  if (f.dim() != 1) throw ArgumentError("oracle scan requires a one-dimensional payoff");
  if (!(radius > 0.0)) throw ArgumentError("oracle radius must be positive");
  require_growth(f, cost);
  const int n = cfg.grid_points;
  const double h = 2.0 * radius / (n - 1);
  auto feasible = [&](double pt) { return !cfg.floor || pt >= *cfg.floor; };
  double best = f.eval_unchecked(&x);
  if (regime == Regime::unconstrained) {
    for (int i = 0; i < n; ++i) {
      const double y = -radius + h * i;
      const double pt = x + y;
      if (!feasible(pt)) continue;
      best = std::max(best, f.eval_unchecked(&pt) - cost.cost_unchecked(std::abs(y)));
    }
    return best;
  }
  // Two-point kernels with mean x: up = x + a, down = x - b, weight on up b/(a+b).
  const int half = (n - 1) / 2;
  std::vector<double> up_val(static_cast<std::size_t>(half + 1)), down_val(static_cast<std::size_t>(half + 1));
  for (int i = 1; i <= half; ++i) {
    const double a = h * i;
    const double up = x + a;
    const double down = x - a;
    up_val[static_cast<std::size_t>(i)] =
        feasible(up) ? f.eval_unchecked(&up) - cost.cost_unchecked(a) : kNegInf;
    down_val[static_cast<std::size_t>(i)] =
        feasible(down) ? f.eval_unchecked(&down) - cost.cost_unchecked(a) : kNegInf;
  }
  for (int i = 1; i <= half; ++i) {
    const double uv = up_val[static_cast<std::size_t>(i)];
    if (!(uv > kNegInf)) continue;
    for (int j = 1; j <= half; ++j) {
      const double dv = down_val[static_cast<std::size_t>(j)];
      if (!(dv > kNegInf)) continue;
      const double p = static_cast<double>(j) / (i + j);
      best = std::max(best, p * uv + (1.0 - p) * dv);
    }
  }
  return best;
}

std::vector<std::vector<double>> tensor_grid(std::span<const GridAxis> axes) {
  std::vector<std::vector<double>> values;
  for (const auto& a : axes) {
    if (a.count < 1) throw ArgumentError("grid axis count must be >= 1");
    if (a.count > 1 && !(a.max > a.min)) throw ArgumentError("grid axis needs max > min");
    values.push_back(linspace(a.min, a.max, a.count));
  }
  return tensor_scan(std::move(values)).points;
}

CTransformGrid ctrans_grid(const Payoff& f, const CostSpec& cost, Regime regime, std::span<const GridAxis> axes,
                           const SearchConfig& cfg, TransformMethod method) {
  if (axes.size() != static_cast<std::size_t>(f.dim()))
    throw ArgumentError("grid has " + std::to_string(axes.size()) + " axes but the payoff has dimension " +
                        std::to_string(f.dim()));
  if (method == TransformMethod::network)
    throw ArgumentError("network surfaces are produced by the trainer, not ctrans_grid");
  if (method == TransformMethod::oracle && f.dim() != 1)
    throw ArgumentError("oracle surfaces are one-dimensional only");
  cfg.validate();
  require_growth(f, cost);

  CTransformGrid grid;
  grid.points = tensor_grid(axes);
  grid.method = method;
  grid.regime = regime;
  grid.payoff_id = f.name();
  grid.cost_id = cost_id(cost);
  grid.payoff.resize(grid.points.size());
  grid.values.resize(grid.points.size());
  const double oracle_radius = cfg.radius0 * 4.0;
  parallel_for(grid.points.size(), [&](std::size_t i) {
    const auto& pt = grid.points[i];
    grid.payoff[i] = f.eval(pt);
    grid.values[i] = method == TransformMethod::oracle ? ctrans_oracle_1d(f, cost, regime, pt[0], oracle_radius, cfg)
                                                       : ctrans(f, cost, regime, pt, cfg);
  });
  return grid;
}

}  // namespace wot
