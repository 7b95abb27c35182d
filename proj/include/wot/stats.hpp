#pragma once

#include <cmath>
#include <span>

namespace wot {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
};

/// Two-pass mean and standard error of the mean.
inline MeanEstimate mean_and_error(std::span<const double> xs) {
  MeanEstimate r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  r.mean = sum / n;
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std_error = std::sqrt(ss / (n - 1.0) / n);
  return r;
}

}  // namespace wot
