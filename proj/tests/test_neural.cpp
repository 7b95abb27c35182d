#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "fd_check.hpp"
#include "wot/error.hpp"
#include "wot/neural.hpp"
#include "wot/rng.hpp"
#include "wot/stats.hpp"

using namespace wot;

namespace {

Eigen::MatrixXd random_batch(int d, int n, std::uint64_t seed, double lo = -1.0, double hi = 2.0) {
  Rng r(seed);
  Eigen::MatrixXd b(d, n);
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = lo + (hi - lo) * r.uniform();
  return b;
}

// Straightforward recomputation of the layer composition.
Eigen::VectorXd brute_forward(const Mlp& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd h = x;
  const auto& P = net.params();
  for (std::size_t k = 0; k < P.weights.size(); ++k) {
    Eigen::VectorXd z(P.weights[k].rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      double s = P.biases[k](i);
      for (Eigen::Index j = 0; j < h.size(); ++j) s += P.weights[k](i, j) * h(j);
      z(i) = s;
    }
    if (k + 1 < P.weights.size()) {
      for (Eigen::Index i = 0; i < z.size(); ++i)
        z(i) = net.activation() == Activation::relu ? std::max(0.0, z(i)) : std::tanh(z(i));
    }
    h = z;
  }
  return h;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("shapes") {
    const Mlp net(Mlp::layer_sizes(3, 4, 20, 4));
    CHECK(net.sizes() == std::vector<int>{3, 20, 20, 20, 20, 4});
    CHECK(net.hidden_layers() == 4);
    CHECK(net.parameter_count() == 3 * 20 + 20 + 3 * (20 * 20 + 20) + 20 * 4 + 4);
    CHECK(net.params().weights[0].rows() == 20);
    CHECK(net.params().weights[0].cols() == 3);
    CHECK(net.params().weights.back().rows() == 4);
    CHECK_THROWS_AS(Mlp(std::vector<int>{3}), ArgumentError);
    CHECK_THROWS_AS(Mlp(std::vector<int>{3, 0, 1}), ArgumentError);
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), ArgumentError);
  }

  TEST_CASE("zero network outputs zero") {
    const Mlp net(Mlp::layer_sizes(2, 3, 5, 3));
    const auto y = net.forward(std::vector<double>{0.4, -7.0});
    CHECK(y.isZero(0.0));
  }

  TEST_CASE("identity block on nonnegative inputs") {
    Mlp net(std::vector<int>{3, 3, 3});
    net.params().weights[0].setIdentity();
    net.params().weights[1].setIdentity();
    Rng r(1);
    for (int i = 0; i < 50; ++i) {
      const std::vector<double> x{r.uniform(), 2 * r.uniform(), 5 * r.uniform()};
      const auto y = net.forward(x);
      for (int k = 0; k < 3; ++k) CHECK(y(k) == x[k]);
    }
  }

  TEST_CASE("forward matches a brute-force composition") {
    for (Activation act : {Activation::relu, Activation::tanh}) {
      const Mlp net = Mlp::he_uniform(Mlp::layer_sizes(3, 4, 7, 2), act, 99);
      const Eigen::MatrixXd xs = random_batch(3, 100, 5);
      const Eigen::MatrixXd batch_out = net.forward_batch(xs);
      for (int j = 0; j < 100; ++j) {
        const Eigen::VectorXd x = xs.col(j);
        const Eigen::VectorXd ref = brute_forward(net, x);
        const Eigen::VectorXd one = net.forward(std::span<const double>(x.data(), 3));
        CHECK((one - ref).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((batch_out.col(j) - ref).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  TEST_CASE("he-uniform initialisation") {
    const Mlp a = Mlp::he_uniform(Mlp::layer_sizes(2, 2, 50, 2), Activation::relu, 4);
    const Mlp b = Mlp::he_uniform(Mlp::layer_sizes(2, 2, 50, 2), Activation::relu, 4);
    for (std::size_t k = 0; k < a.params().weights.size(); ++k) {
      const auto& w = a.params().weights[k];
      CHECK(w == b.params().weights[k]);
      const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
      CHECK(w.cwiseAbs().maxCoeff() <= bound);
      CHECK(a.params().biases[k].isZero(0.0));
    }
  }

  TEST_CASE("checkpoint round trip") {
    const Mlp net = Mlp::he_uniform(Mlp::layer_sizes(2, 3, 6, 3), Activation::tanh, 12);
    const auto path = std::filesystem::temp_directory_path() / "wot_unit_net.txt";
    net.save(path.string());
    const Mlp back = Mlp::load(path.string());
    std::filesystem::remove(path);
    CHECK(back.sizes() == net.sizes());
    CHECK(back.activation() == Activation::tanh);
    for (std::size_t k = 0; k < net.params().weights.size(); ++k) {
      CHECK(back.params().weights[k] == net.params().weights[k]);
      CHECK(back.params().biases[k] == net.params().biases[k]);
    }
    CHECK_THROWS_AS(Mlp::load("/nonexistent/net.txt"), IoError);
  }
}

TEST_SUITE("objectives") {
  TEST_CASE("zero network gives the batch mean of the payoff") {
    const Payoff q = Payoff::earthquake_default();
    const Eigen::MatrixXd batch = random_batch(2, 64, 3);
    double mean = 0.0;
    for (int j = 0; j < 64; ++j) mean += q.eval(std::span<const double>(batch.col(j).data(), 2));
    mean /= 64.0;
    const Mlp un(Mlp::layer_sizes(2, 2, 8, 2));
    const Mlp mart(Mlp::layer_sizes(2, 2, 8, 3));
    CHECK(objective_unconstrained(un, q, CostSpec(2.0), batch).value == doctest::Approx(mean).epsilon(1e-15));
    CHECK(objective_martingale(mart, q, CostSpec(3.0, 0.1), batch).value == doctest::Approx(mean).epsilon(1e-15));
  }

  TEST_CASE("constant payoff leaves only the cost") {
    const Payoff m = Payoff::constant(0.6, 2);
    const CostSpec c(2.0);
    const Mlp net = Mlp::he_uniform(Mlp::layer_sizes(2, 2, 8, 2), Activation::relu, 1);
    const Eigen::MatrixXd batch = random_batch(2, 32, 9);
    const Eigen::MatrixXd y = net.forward_batch(batch);
    double cost = 0.0;
    for (int j = 0; j < 32; ++j) cost += c.cost(y.col(j).norm());
    CHECK(objective_unconstrained(net, m, c, batch).value == doctest::Approx(0.6 - cost / 32).epsilon(1e-12));
  }

  TEST_CASE("affine payoff under the martingale objective") {
    const Payoff f = Payoff::affine({1.0}, 0.0);
    const CostSpec c(3.0, 1.0 / 12);
    const Mlp net = Mlp::he_uniform(Mlp::layer_sizes(1, 2, 8, 2), Activation::relu, 17);
    const Eigen::MatrixXd batch = random_batch(1, 50, 4, 0.5, 1.5);
    const Eigen::MatrixXd out = net.forward_batch(batch);
    double expected = 0.0;
    for (int j = 0; j < 50; ++j) {
      const double y = out(0, j);
      const double p = 1.0 / (1.0 + std::exp(-out(1, j)));
      expected += batch(0, j) - p * c.cost(std::abs(y)) - (1 - p) * c.cost(p / (1 - p) * std::abs(y));
    }
    expected /= 50.0;
    const double value = objective_martingale(net, f, c, batch).value;
    CHECK(value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(value <= batch.mean() + 1e-15);
  }

  TEST_CASE("backprop agrees with central differences") {
    const Payoff q = Payoff::earthquake_default();
    const Payoff q1 = Payoff::earthquake({Bump{{0.5}, 1.0, 0.6}, Bump{{1.5}, 0.4, 0.3}});
    for (int trial = 0; trial < 4; ++trial) {
      const std::uint64_t seed = 100 + trial;
      const Mlp un = Mlp::he_uniform(Mlp::layer_sizes(2, 2, 6, 2), Activation::tanh, seed);
      const Mlp mart = Mlp::he_uniform(Mlp::layer_sizes(1, 2, 6, 2), Activation::tanh, seed);
      CHECK(testing::max_relative_gradient_error(Regime::unconstrained, un, q, CostSpec(2.0), random_batch(2, 8, seed)) <
            1e-4);
      CHECK(testing::max_relative_gradient_error(Regime::martingale, mart, q1, CostSpec(3.0, 1.0 / 12),
                                                 random_batch(1, 8, seed)) < 1e-4);
    }
  }

  TEST_CASE("backward of a linear read-out") {
    const Mlp net = Mlp::he_uniform(std::vector<int>{2, 3}, Activation::relu, 2);
    const Eigen::MatrixXd x = random_batch(2, 5, 1);
    const Eigen::MatrixXd g = random_batch(3, 5, 2);
    const MlpTensors grads = net.backward(x, g);
    CHECK((grads.weights[0] - g * x.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((grads.biases[0] - g.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("ascends a concave quadratic") {
    Mlp net(std::vector<int>{1, 1});
    AdamState adam(net, 1e-3);
    auto run_to = [&](int steps) {
      while (adam.steps() < static_cast<std::uint64_t>(steps)) {
        MlpTensors g = net.zeros_like();
        const double w = net.params().weights[0](0, 0);
        g.weights[0](0, 0) = -2.0 * (w - 3.0);
        adam.step(net.params(), g);
      }
      return net.params().weights[0](0, 0);
    };
    // Scalar Adam recurrence evaluated independently in double precision.
    CHECK(run_to(5000) == doctest::Approx(2.9377290647153163).epsilon(1e-10));
    CHECK(std::abs(run_to(6000) - 3.0) < 1e-2);
    CHECK(net.params().biases[0](0) == 0.0);
  }

  TEST_CASE("zero gradient leaves parameters unchanged") {
    Mlp net = Mlp::he_uniform(std::vector<int>{2, 4, 1}, Activation::relu, 3);
    const MlpTensors before = net.params();
    AdamState adam(net);
    adam.step(net.params(), net.zeros_like());
    CHECK(adam.steps() == 1);
    for (std::size_t k = 0; k < before.weights.size(); ++k) CHECK(net.params().weights[k] == before.weights[k]);
  }

  TEST_CASE("first step moves by the learning rate along the gradient sign") {
    Mlp net = Mlp::he_uniform(std::vector<int>{3, 2}, Activation::relu, 3);
    const MlpTensors before = net.params();
    MlpTensors g = net.zeros_like();
    g.weights[0] << 0.5, -2.0, 1e-3, -7.0, 3.0, 0.25;
    g.biases[0] << -0.1, 4.0;
    AdamState adam(net, 1e-3);
    adam.step(net.params(), g);
    const Eigen::MatrixXd dw = net.params().weights[0] - before.weights[0];
    for (Eigen::Index i = 0; i < dw.size(); ++i) {
      const double sign = g.weights[0].data()[i] > 0 ? 1.0 : -1.0;
      CHECK(dw.data()[i] == doctest::Approx(1e-3 * sign).epsilon(1e-4));
    }
    CHECK(net.params().biases[0](1) - before.biases[0](1) == doctest::Approx(1e-3).epsilon(1e-6));
  }
}

TEST_SUITE("training") {
  TEST_CASE("moving average recomputation") {
    Rng r(5);
    std::vector<double> raw(257);
    for (double& v : raw) v = r.normal();
    for (int window : {1, 7, 100}) {
      const auto ma = moving_average(raw, window);
      REQUIRE(ma.size() == raw.size());
      for (std::size_t k = 0; k < raw.size(); ++k) {
        const std::size_t lo = k + 1 >= static_cast<std::size_t>(window) ? k + 1 - window : 0;
        double s = 0.0;
        for (std::size_t i = lo; i <= k; ++i) s += raw[i];
        CHECK(ma[k] == doctest::Approx(s / static_cast<double>(k + 1 - lo)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("training is deterministic") {
    const auto mu = ReferenceMeasure::gaussian(Eigen::Vector2d(0.75, 0.25), Eigen::Matrix2d::Identity());
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch = 20;
    cfg.hidden = 2;
    cfg.width = 8;
    cfg.window = 10;
    cfg.eval_samples = 2000;
    cfg.seed = 21;
    const auto a = train(mu, Payoff::earthquake_default(), CostSpec(2.0), Regime::unconstrained, cfg);
    const auto b = train(mu, Payoff::earthquake_default(), CostSpec(2.0), Regime::unconstrained, cfg);
    CHECK(a.raw == b.raw);
    CHECK(a.moving_average == b.moving_average);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    CHECK(a.raw.size() == 60);
    for (std::size_t k = 0; k < a.net.params().weights.size(); ++k)
      CHECK(a.net.params().weights[k] == b.net.params().weights[k]);
  }

  TEST_CASE("constant payoff trains to the constant") {
    const auto mu = ReferenceMeasure::lognormal(Eigen::VectorXd::Ones(1), 0.2, 0.5);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch = 50;
    cfg.hidden = 2;
    cfg.width = 10;
    cfg.eval_samples = 20000;
    const auto rep = train(mu, Payoff::constant(0.4, 1), CostSpec(3.0, 1.0 / 12), Regime::martingale, cfg);
    CHECK(std::abs(rep.estimate - 0.4) <= std::max(2.0 * rep.std_error, 1e-3));
    CHECK(rep.estimate <= 0.4 + 1e-12);
  }

  TEST_CASE("training validation") {
    TrainConfig cfg;
    cfg.window = cfg.epochs + 1;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.batch = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    const auto mu = ReferenceMeasure::lognormal(Eigen::VectorXd::Ones(1), 0.2, 0.5);
    TrainConfig small;
    small.epochs = 5;
    small.window = 5;
    CHECK_THROWS_AS(train(mu, Payoff::quadratic(2.0, 1), CostSpec(2.0), Regime::unconstrained, small), GrowthError);
  }
}
