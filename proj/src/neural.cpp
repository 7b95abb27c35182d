#include "wot/neural.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wot/error.hpp"
#include "wot/rng.hpp"
#include "wot/stats.hpp"

namespace wot {

namespace {

constexpr std::size_t kEvalChunk = 8192;

void apply_activation(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// Multiplies g in place by act'(z).
void activation_backward(Activation a, const Eigen::MatrixXd& z, Eigen::MatrixXd& g) {
  if (a == Activation::relu) {
    g = (z.array() > 0.0).select(g, 0.0);
  } else {
    g.array() *= 1.0 - z.array().tanh().square();
  }
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;  // pre-activations of hidden layers
  std::vector<Eigen::MatrixXd> act;  // act[0] = inputs, act[l] = hidden output l
  Eigen::MatrixXd out;
};

ForwardCache forward_cached(const Mlp& net, const Eigen::MatrixXd& inputs) {
  const auto& p = net.params();
  const std::size_t maps = p.weights.size();
  ForwardCache c;
  c.act.push_back(inputs);
  for (std::size_t l = 0; l + 1 < maps; ++l) {
    Eigen::MatrixXd z = p.weights[l] * c.act.back();
    z.colwise() += p.biases[l];
    c.pre.push_back(z);
    apply_activation(net.activation(), z);
    c.act.push_back(std::move(z));
  }
  c.out = p.weights.back() * c.act.back();
  c.out.colwise() += p.biases.back();
  return c;
}

MlpTensors backward_cached(const Mlp& net, const ForwardCache& c, Eigen::MatrixXd g) {
  const auto& p = net.params();
  const std::size_t maps = p.weights.size();
  MlpTensors grad;
  grad.weights.resize(maps);
  grad.biases.resize(maps);
  for (std::size_t l = maps; l-- > 0;) {
    grad.weights[l].noalias() = g * c.act[l].transpose();
    grad.biases[l] = g.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd next = p.weights[l].transpose() * g;
      activation_backward(net.activation(), c.pre[l - 1], next);
      g = std::move(next);
    }
  }
  return grad;
}

void check_batch(const Mlp& net, const Payoff& f, const Eigen::MatrixXd& batch, int extra_outputs) {
  if (batch.rows() != f.dim() || net.input_dim() != f.dim())
    throw ArgumentError("network input, batch rows and payoff dimension must agree");
  if (net.output_dim() != f.dim() + extra_outputs)
    throw ArgumentError("network output dimension " + std::to_string(net.output_dim()) + " does not match regime (" +
                        std::to_string(f.dim() + extra_outputs) + " expected)");
  if (batch.cols() == 0) throw ArgumentError("empty batch");
}

struct Integrands {
  Eigen::VectorXd values;
  Eigen::MatrixXd out_grad;  // d integrand_j / d out_j, unscaled
};

Integrands unconstrained_terms(const Payoff& f, const CostSpec& cost, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& out, bool with_grad) {
  const int d = f.dim();
  const auto n = x.cols();
  Integrands r;
  r.values.resize(n);
  if (with_grad) r.out_grad.resize(d, n);
  Eigen::VectorXd pt(d), gf(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    pt = x.col(j) + out.col(j);
    const double norm = out.col(j).norm();
    r.values(j) = f.eval_unchecked(pt.data()) - cost.cost_unchecked(norm);
    if (!with_grad) continue;
    f.grad_unchecked(pt.data(), gf.data());
    r.out_grad.col(j) = gf;
    if (norm > 0.0) r.out_grad.col(j) -= (cost.deriv_unchecked(norm) / norm) * out.col(j);
  }
  return r;
}

Integrands martingale_terms(const Payoff& f, const CostSpec& cost, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& out, bool with_grad) {
  const int d = f.dim();
  const auto n = x.cols();
  Integrands r;
  r.values.resize(n);
  if (with_grad) r.out_grad.resize(d + 1, n);
  Eigen::VectorXd up(d), down(d), g_up(d), g_down(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto y = out.col(j).head(d);
    const double v = out(d, j);
    const double p = 1.0 / (1.0 + std::exp(-v));
    const double q = 1.0 / (1.0 + std::exp(v));
    const double ratio = std::exp(v);  // p / (1 - p)
    const double norm = y.norm();
    up = x.col(j) + y;
    down = x.col(j) - ratio * y;
    const double branch_up = f.eval_unchecked(up.data()) - cost.cost_unchecked(norm);
    const double branch_down = f.eval_unchecked(down.data()) - cost.cost_unchecked(ratio * norm);
    r.values(j) = p * branch_up + q * branch_down;
    if (!with_grad) continue;
    f.grad_unchecked(up.data(), g_up.data());
    f.grad_unchecked(down.data(), g_down.data());
    const double c_up = cost.deriv_unchecked(norm);
    const double c_down = cost.deriv_unchecked(ratio * norm);
    // (1 - p) * ratio == p collapses the chain rule through the far point.
    auto gy = r.out_grad.col(j).head(d);
    gy = p * (g_up - g_down);
    if (norm > 0.0) gy -= (p * (c_up + c_down) / norm) * y;
    r.out_grad(d, j) = p * q * (branch_up - branch_down) - p * (g_down.dot(y) + c_down * norm);
  }
  return r;
}

Integrands terms(Regime regime, const Payoff& f, const CostSpec& cost, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& out, bool with_grad) {
  return regime == Regime::unconstrained ? unconstrained_terms(f, cost, x, out, with_grad)
                                         : martingale_terms(f, cost, x, out, with_grad);
}

int extra_outputs(Regime regime) { return regime == Regime::martingale ? 1 : 0; }

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ArgumentError("unknown activation: " + std::string(s));
}

Mlp::Mlp(std::vector<int> sizes, Activation activation) : sizes_(std::move(sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ArgumentError("network needs at least input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw ArgumentError("network layer sizes must be >= 1");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    params_.weights.push_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    params_.biases.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

Mlp Mlp::he_uniform(std::vector<int> sizes, Activation activation, std::uint64_t seed) {
  Mlp net(std::move(sizes), activation);
  Rng rng(seed);
  for (auto& w : net.params_.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index k = 0; k < w.cols(); ++k) w(i, k) = bound * (2.0 * rng.uniform() - 1.0);
  }
  return net;
}

std::vector<int> Mlp::layer_sizes(int d_in, int hidden, int width, int d_out) {
  if (hidden < 0) throw ArgumentError("hidden layer count must be >= 0");
  std::vector<int> sizes{d_in};
  for (int i = 0; i < hidden; ++i) sizes.push_back(width);
  sizes.push_back(d_out);
  return sizes;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < params_.weights.size(); ++l)
    n += static_cast<std::size_t>(params_.weights[l].size() + params_.biases[l].size());
  return n;
}

MlpTensors Mlp::zeros_like() const {
  MlpTensors z;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    z.weights.push_back(Eigen::MatrixXd::Zero(params_.weights[l].rows(), params_.weights[l].cols()));
    z.biases.push_back(Eigen::VectorXd::Zero(params_.biases[l].size()));
  }
  return z;
}

Eigen::VectorXd Mlp::forward(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(input_dim())) throw ArgumentError("network input dimension mismatch");
  const Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward_batch(in).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw ArgumentError("network input dimension mismatch");
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    Eigen::MatrixXd z = params_.weights[l] * h;
    z.colwise() += params_.biases[l];
    if (l + 1 < params_.weights.size()) apply_activation(activation_, z);
    h = std::move(z);
  }
  return h;
}

MlpTensors Mlp::backward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& out_grad) const {
  if (inputs.rows() != input_dim() || out_grad.rows() != output_dim() || inputs.cols() != out_grad.cols())
    throw ArgumentError("backward shapes do not match the network");
  return backward_cached(*this, forward_cached(*this, inputs), out_grad);
}

void Mlp::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << "wot-mlp 1\n";
  out << "activation " << to_string(activation_) << "\n";
  out << "sizes";
  for (int s : sizes_) out << " " << s;
  out << "\n" << std::setprecision(17);
  for (const auto& w : params_.weights)
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index k = 0; k < w.cols(); ++k) out << (k ? " " : "") << w(i, k);
      out << "\n";
    }
  for (const auto& b : params_.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << b(i);
    out << "\n";
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string tag, line;
  int version = 0;
  in >> tag >> version;
  if (tag != "wot-mlp" || version != 1) throw IoError("not a version-1 network checkpoint: " + path);
  std::string act_key, act_name;
  in >> act_key >> act_name;
  if (act_key != "activation") throw IoError("checkpoint missing activation line");
  std::string sizes_key;
  in >> sizes_key;
  if (sizes_key != "sizes") throw IoError("checkpoint missing sizes line");
  std::getline(in, line);
  std::istringstream ss(line);
  std::vector<int> sizes;
  for (int s; ss >> s;) sizes.push_back(s);
  Mlp net(sizes, parse_activation(act_name));
  for (auto& w : net.params_.weights)
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index k = 0; k < w.cols(); ++k)
        if (!(in >> w(i, k))) throw IoError("truncated checkpoint weights: " + path);
  for (auto& b : net.params_.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i)
      if (!(in >> b(i))) throw IoError("truncated checkpoint biases: " + path);
  return net;
}

ObjectiveResult objective(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                          const Eigen::MatrixXd& batch) {
  check_batch(net, f, batch, extra_outputs(regime));
  const ForwardCache cache = forward_cached(net, batch);
  Integrands t = terms(regime, f, cost, batch, cache.out, true);
  const double scale = 1.0 / static_cast<double>(batch.cols());
  ObjectiveResult r;
  r.value = t.values.mean();
  r.grad = backward_cached(net, cache, t.out_grad * scale);
  return r;
}

ObjectiveResult objective_unconstrained(const Mlp& net, const Payoff& f, const CostSpec& cost,
                                        const Eigen::MatrixXd& batch) {
  return objective(Regime::unconstrained, net, f, cost, batch);
}

ObjectiveResult objective_martingale(const Mlp& net, const Payoff& f, const CostSpec& cost,
                                     const Eigen::MatrixXd& batch) {
  return objective(Regime::martingale, net, f, cost, batch);
}

Eigen::VectorXd integrand(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                          const Eigen::MatrixXd& batch) {
  check_batch(net, f, batch, extra_outputs(regime));
  return terms(regime, f, cost, batch, net.forward_batch(batch), false).values;
}

AdamState::AdamState(const Mlp& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(net.zeros_like()), v_(net.zeros_like()) {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ArgumentError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ArgumentError("Adam epsilon must be positive");
}

void AdamState::step(MlpTensors& params, const MlpTensors& grad) {
  if (params.weights.size() != m_.weights.size() || grad.weights.size() != m_.weights.size())
    throw ArgumentError("Adam state and parameter shapes differ");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    if (p.size() != g.size() || p.size() != m.size()) throw ArgumentError("Adam tensor shape mismatch");
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    p.array() += lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < m_.weights.size(); ++l) {
    update(params.weights[l], m_.weights[l], v_.weights[l], grad.weights[l]);
    update(params.biases[l], m_.biases[l], v_.biases[l], grad.biases[l]);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch < 1) throw ArgumentError("batch size must be >= 1");
  if (hidden < 0) throw ArgumentError("hidden layers must be >= 0");
  if (width < 1) throw ArgumentError("width must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (window < 1 || window > epochs) throw ArgumentError("moving-average window must lie in [1, epochs]");
  if (eval_samples < 2) throw ArgumentError("evaluation sample count must be >= 2");
}

std::vector<double> moving_average(std::span<const double> raw, int window) {
  if (window < 1) throw ArgumentError("moving-average window must be >= 1");
  std::vector<double> out(raw.size());
  double acc = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    acc += raw[k];
    if (k >= w) acc -= raw[k - w];
    out[k] = acc / static_cast<double>(std::min(k + 1, w));
  }
  return out;
}

TrainReport train(const ReferenceMeasure& measure, const Payoff& f, const CostSpec& cost, Regime regime,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (measure.dim() != f.dim()) throw ArgumentError("measure and payoff dimensions differ");
  if (!check_growth(f, cost))
    throw GrowthError("payoff " + f.name() + " is not dominated by cost " + cost_id(cost));
  const int d = f.dim();
  Mlp net = Mlp::he_uniform(Mlp::layer_sizes(d, cfg.hidden, cfg.width, d + extra_outputs(regime)), cfg.activation,
                            derive_seed(cfg.seed, 0));
  AdamState adam(net, cfg.learning_rate);

  TrainReport report{.raw = {}, .moving_average = {}, .net = net};
  report.regime = regime;
  report.raw.reserve(static_cast<std::size_t>(cfg.epochs));
  const auto started = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Samples batch = measure.sample(static_cast<std::size_t>(cfg.batch),
                                         derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch) + 1));
    ObjectiveResult r = objective(regime, net, f, cost, batch);
    bool finite = std::isfinite(r.value);
    for (std::size_t l = 0; finite && l < r.grad.weights.size(); ++l)
      finite = r.grad.weights[l].allFinite() && r.grad.biases[l].allFinite();
    if (!finite)
      throw NumericalError("non-finite objective or gradient at epoch " + std::to_string(epoch) +
                           " (value " + std::to_string(r.value) + ")");
    report.raw.push_back(r.value);
    adam.step(net.params(), r.grad);
  }
  report.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.moving_average = moving_average(report.raw, cfg.window);

  report.eval_seed = cfg.eval_seed.value_or(derive_seed(cfg.seed, 0xe7a1));
  report.eval_samples = cfg.eval_samples;
  const Samples xs = measure.sample(cfg.eval_samples, report.eval_seed);
  std::vector<double> values(cfg.eval_samples);
  for (std::size_t start = 0; start < cfg.eval_samples; start += kEvalChunk) {
    const auto len = static_cast<Eigen::Index>(std::min(kEvalChunk, cfg.eval_samples - start));
    const Eigen::VectorXd vals =
        integrand(regime, net, f, cost, xs.middleCols(static_cast<Eigen::Index>(start), len));
    std::copy(vals.data(), vals.data() + len, values.begin() + static_cast<std::ptrdiff_t>(start));
  }
  const MeanEstimate est = mean_and_error(values);
  report.estimate = est.mean;
  report.std_error = est.std_error;
  if (!std::isfinite(report.estimate)) throw NumericalError("non-finite final network estimate");
  report.net = std::move(net);
  return report;
}

std::vector<double> network_transform(Regime regime, const Mlp& net, const Payoff& f, const CostSpec& cost,
                                      const std::vector<std::vector<double>>& points) {
  Eigen::MatrixXd x(f.dim(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].size() != static_cast<std::size_t>(f.dim())) throw ArgumentError("grid point dimension mismatch");
    for (int i = 0; i < f.dim(); ++i) x(i, static_cast<Eigen::Index>(j)) = points[j][static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd vals = integrand(regime, net, f, cost, x);
  return {vals.data(), vals.data() + vals.size()};
}

}  // namespace wot
