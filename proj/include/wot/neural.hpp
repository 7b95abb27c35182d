#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wot/costs.hpp"
#include "wot/ctransform.hpp"
#include "wot/measures.hpp"
#include "wot/payoffs.hpp"

namespace wot {

enum class Activation { relu, tanh };
std::string to_string(Activation a);
Activation parse_activation(std::string_view s);

/// Parameter-shaped tensors: one weight matrix (out x in) and one bias
/// vector per affine map.
struct MlpTensors {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Fully connected feed-forward network
///   x -> A_m . act . A_{m-1} . ... . act . A_0(x)
/// with layer sizes [d_in, n, ..., n, d_out]. ReLU'(0) is taken as 0.
class Mlp {
 public:
  /// All parameters zero. sizes needs at least input and output.
  Mlp(std::vector<int> sizes, Activation activation = Activation::relu);

  /// Weights uniform on +-sqrt(6 / fan_in), biases zero.
  static Mlp he_uniform(std::vector<int> sizes, Activation activation, std::uint64_t seed);
  /// [d_in, width x hidden, d_out]
  static std::vector<int> layer_sizes(int d_in, int hidden, int width, int d_out);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int hidden_layers() const { return static_cast<int>(sizes_.size()) - 2; }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t parameter_count() const;

  const MlpTensors& params() const { return params_; }
  MlpTensors& params() { return params_; }
  /// Zero tensors with this network's shapes.
  MlpTensors zeros_like() const;

  Eigen::VectorXd forward(std::span<const double> x) const;
  /// Columns are inputs; returns outputs as columns.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  /// Gradient of sum_j <out_grad.col(j), net(inputs.col(j))> w.r.t. all parameters.
  MlpTensors backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& out_grad) const;

  /// Plain-text checkpoint: header, activation, layer sizes, then every
  /// weight matrix row-major, then every bias vector.
  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  std::vector<int> sizes_;
  Activation activation_;
  MlpTensors params_;
};

struct ObjectiveResult {
  double value = 0.0;
  MlpTensors grad;
};

/// Batch mean of f(x + y(x)) - c(|y(x)|) and its parameter gradient.
/// Requires d_out == d_in.
ObjectiveResult objective_unconstrained(const Mlp& net, const Payoff& f, const CostSpec& cost,
                                        const Eigen::MatrixXd& batch);

/// Batch mean of p [f(x+y) - c(|y|)] + (1-p) [f(x - p/(1-p) y) - c(p/(1-p) |y|)]
/// with (y, v) = net(x), p = 1/(1 + e^-v). Requires d_out == d_in + 1.
ObjectiveResult objective_martingale(const Mlp& net, const Payoff& f, const CostSpec& cost,
                                     const Eigen::MatrixXd& batch);

ObjectiveResult objective(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                          const Eigen::MatrixXd& batch);

/// Per-sample integrand of the objective (no gradients).
Eigen::VectorXd integrand(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                          const Eigen::MatrixXd& batch);

/// Adam with bias correction, ascending: parameters move along +gradient.
class AdamState {
 public:
  explicit AdamState(const Mlp& net, double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                     double epsilon = 1e-8);

  void step(MlpTensors& params, const MlpTensors& grad);

  double learning_rate() const { return lr_; }
  std::uint64_t steps() const { return t_; }
  const MlpTensors& first_moment() const { return m_; }
  const MlpTensors& second_moment() const { return v_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  MlpTensors m_, v_;
};

struct TrainConfig {
  int epochs = 10'000;
  int batch = 100;
  std::uint64_t seed = 0;
  int hidden = 4;
  int width = 20;
  double learning_rate = 1e-3;
  Activation activation = Activation::relu;
  int window = 100;
  std::size_t eval_samples = 1'000'000;
  /// Seed of the final evaluation sample; derived from `seed` when unset.
  std::optional<std::uint64_t> eval_seed;

  void validate() const;
};

struct TrainReport {
  std::vector<double> raw;
  std::vector<double> moving_average;
  Mlp net{std::vector<int>{1, 1}};
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t eval_samples = 0;
  std::uint64_t eval_seed = 0;
  Regime regime = Regime::unconstrained;
  /// Wall-clock time of the epoch loop (excludes the final evaluation).
  double train_seconds = 0.0;
};

/// Trailing-window means: entry k averages raw[max(0, k-window+1) .. k].
std::vector<double> moving_average(std::span<const double> raw, int window);

/// Stochastic-gradient ascent with a fresh batch every epoch, then a final
/// Monte Carlo evaluation of the fixed network. Throws NumericalError when
/// the objective becomes non-finite and GrowthError when the payoff is not
/// dominated by the cost.
TrainReport train(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                  const TrainConfig& cfg);

/// Network transform on grid points: f(x + y(x)) - c(|y(x)|) or the
/// two-point martingale integrand.
std::vector<double> network_transform(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                                      const std::vector<std::vector<double>>& points);

}  // namespace wot
