#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace wot {

/// Column-major sample matrix: one column per draw, one row per coordinate.
using Samples = Eigen::MatrixXd;

struct DiracMeasure {
  Eigen::VectorXd point;
};

struct GaussianMeasure {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd factor;  // lower Cholesky factor of covariance
};

/// Zero-rate Black-Scholes marginal, independent per asset:
/// S_T = spot * exp(vol * sqrt(T) * Z - vol^2 T / 2).
struct LogNormalMeasure {
  Eigen::VectorXd spot;
  double vol = 0.0;
  double maturity = 0.0;
};

/// Marginal of dX = sigma dB at time T: N(x0, T sigma sigma^T).
struct DiffusionMeasure {
  Eigen::VectorXd x0;
  Eigen::MatrixXd sigma;
  double maturity = 0.0;
};

struct EmpiricalMeasure {
  Samples points;
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

/// Reference measure. Immutable after construction; every factory validates
/// its parameters and throws ArgumentError on malformed input.
class ReferenceMeasure {
 public:
  using Variant = std::variant<DiracMeasure, GaussianMeasure, LogNormalMeasure,
                               DiffusionMeasure, EmpiricalMeasure>;

  static ReferenceMeasure dirac(Eigen::VectorXd point);
  static ReferenceMeasure gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static ReferenceMeasure lognormal(Eigen::VectorXd spot, double vol, double maturity);
  static ReferenceMeasure diffusion(Eigen::VectorXd x0, Eigen::MatrixXd sigma, double maturity);
  static ReferenceMeasure empirical(Samples points);

  int dim() const;
  const Variant& variant() const { return v_; }
  std::string name() const;

  /// n i.i.d. draws as columns. Draws are generated sequentially from one
  /// stream, so sample(n, s) is a prefix of sample(2n, s).
  Samples sample(std::size_t n, std::uint64_t seed) const;

  /// Estimate of the integral of |x|^p. Closed forms where available,
  /// otherwise Monte Carlo on mc_samples draws with the reported error.
  MomentEstimate moment(double p, std::size_t mc_samples = 1'000'000,
                        std::uint64_t seed = 0x6d6f6d656e74ULL) const;

  /// Exact mean vector.
  Eigen::VectorXd mean() const;

 private:
  explicit ReferenceMeasure(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Loads points from CSV: one row per point, d columns, optional header.
Samples load_points_csv(const std::string& path);

}  // namespace wot
