#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace wot {

struct SimplexResult {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Nelder-Mead maximization. Stops when every vertex is within `tol`
/// (max-norm) of the best vertex or after `max_evals` evaluations. NaN
/// objective values are treated as -inf.
template <class F>
SimplexResult nelder_mead_maximize(F&& objective, std::vector<double> start, std::span<const double> steps,
                                   double tol, int max_evals) {
  const std::size_t n = start.size();
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = objective(std::span<const double>(x));
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(pts[i][k] - pts[best][k]));
    if (diameter < tol || evals >= max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + kReflect * (centroid[k] - pts[worst][k]);
    const double reflected = eval(trial);

    if (reflected > vals[best]) {
      for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + kExpand * (trial[k] - centroid[k]);
      const double expanded = eval(trial2);
      if (expanded > reflected) {
        pts[worst] = trial2;
        vals[worst] = expanded;
      } else {
        pts[worst] = trial;
        vals[worst] = reflected;
      }
      continue;
    }
    if (reflected > vals[second_worst]) {
      pts[worst] = trial;
      vals[worst] = reflected;
      continue;
    }
    // Contraction: outside if the reflection beat the worst vertex, inside otherwise.
    const bool outside = reflected > vals[worst];
    const std::vector<double>& base = outside ? trial : pts[worst];
    for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + kContract * (base[k] - centroid[k]);
    const double contracted = eval(trial2);
    if (contracted > (outside ? reflected : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = contracted;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + kShrink * (pts[i][k] - pts[best][k]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto it = std::max_element(vals.begin(), vals.end());
  SimplexResult out;
  out.x = pts[static_cast<std::size_t>(it - vals.begin())];
  out.value = *it;
  out.evaluations = evals;
  return out;
}

}  // namespace wot
