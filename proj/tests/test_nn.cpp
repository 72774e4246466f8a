#include <sstream>

#include "balmse/losses.hpp"
#include "balmse/nn.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace balmse;

namespace {

// tanh from the exponential series, no libm.
double series_tanh(double x) {
  double e = 1.0, term = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= 2 * x / k;
    e += term;
  }
  return (e - 1) / (e + 1);
}

Network random_net(Rng& rng, std::uint64_t seed) {
  const auto depth = 1 + rng.below(3);
  std::vector<Eigen::Index> dims{static_cast<Eigen::Index>(1 + rng.below(6))};
  std::vector<Activation> acts;
  for (std::size_t l = 0; l < depth; ++l) {
    dims.push_back(static_cast<Eigen::Index>(1 + rng.below(6)));
    acts.push_back(rng.below(2) ? Activation::Tanh : Activation::Identity);
  }
  auto net = init_network(dims, acts, seed);
  for (auto& layer : net.layers()) layer.bias = testing::random_matrix(rng, layer.out(), 1, -0.5, 0.5);
  return net;
}

double half_sq_loss(const Network& net, const Matrix& x, const Matrix& target) {
  return 0.5 * (predict(net, x) - target).squaredNorm();
}

}  // namespace

TEST_CASE("init draws bounded Glorot weights and zero biases") {
  const std::vector<Eigen::Index> dims{4, 2};
  const std::vector<Activation> acts{Activation::Tanh};
  const auto net = init_network(dims, acts, 3);
  const auto& w = net.layers()[0].weights;
  CHECK(w.rows() == 2);
  CHECK(w.cols() == 4);
  const double bound = std::sqrt(6.0 / 6.0);
  CHECK(w.cwiseAbs().maxCoeff() < bound);
  CHECK(net.layers()[0].bias.isZero());
  CHECK(init_network(dims, acts, 3) == net);
  CHECK_FALSE(init_network(dims, acts, 4) == net);
}

TEST_CASE("forward pass examples") {
  Layer zero{Matrix::Zero(3, 2), Vector::Zero(3), Activation::Tanh};
  Network z({zero});
  CHECK(predict(z, Matrix::Constant(4, 2, 0.7)).isZero());

  Network ident({Layer{Matrix::Identity(3, 3), Vector::Zero(3), Activation::Identity}});
  Rng rng(1);
  const Matrix x = testing::random_matrix(rng, 5, 3);
  CHECK(predict(ident, x) == x);

  Network one({Layer{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::Tanh}});
  const double out = predict(one, Matrix::Constant(1, 1, 0.5))(0, 0);
  CHECK(std::abs(out - series_tanh(0.5)) < 1e-14);
  CHECK(std::abs(out - 0.462117) < 1e-6);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  Rng rng(2);
  const auto net = random_net(rng, 5);
  const Matrix x = testing::random_matrix(rng, 4, net.input_width());
  const auto trace = forward(net, x);
  const auto g = backward(net, trace, Matrix::Zero(4, net.output_width()));
  CHECK(g.max_abs() == 0.0);
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(3);
  const double h = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    auto net = random_net(rng, 100 + trial);
    const auto rows = static_cast<Eigen::Index>(1 + rng.below(5));
    Matrix x = testing::random_matrix(rng, rows, net.input_width());
    const Matrix target = testing::random_matrix(rng, rows, net.output_width());
    const auto trace = forward(net, x);
    Matrix grad_x;
    const auto g = backward(net, trace, trace.output() - target, &grad_x);
    double worst = 0.0;
    for (std::size_t l = 0; l < net.depth(); ++l) {
      auto& layer = net.layers()[l];
      for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
        const double keep = layer.weights.data()[i];
        layer.weights.data()[i] = keep + h;
        const double up = half_sq_loss(net, x, target);
        layer.weights.data()[i] = keep - h;
        const double down = half_sq_loss(net, x, target);
        layer.weights.data()[i] = keep;
        const double fd = (up - down) / (2 * h);
        const double an = g.weights[l].data()[i];
        if (std::abs(fd) + std::abs(an) > 1e-7) worst = std::max(worst, testing::rel_error(fd, an));
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        const double keep = layer.bias(i);
        layer.bias(i) = keep + h;
        const double up = half_sq_loss(net, x, target);
        layer.bias(i) = keep - h;
        const double down = half_sq_loss(net, x, target);
        layer.bias(i) = keep;
        const double fd = (up - down) / (2 * h);
        if (std::abs(fd) + std::abs(g.bias[l](i)) > 1e-7) worst = std::max(worst, testing::rel_error(fd, g.bias[l](i)));
      }
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double keep = x.data()[i];
      x.data()[i] = keep + h;
      const double up = half_sq_loss(net, x, target);
      x.data()[i] = keep - h;
      const double down = half_sq_loss(net, x, target);
      x.data()[i] = keep;
      const double fd = (up - down) / (2 * h);
      if (std::abs(fd) + std::abs(grad_x.data()[i]) > 1e-7) worst = std::max(worst, testing::rel_error(fd, grad_x.data()[i]));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("linear layer gradient under MSE has the closed form") {
  Rng rng(4);
  const Eigen::Index b = 6, in = 3, out = 2;
  Network net({Layer{testing::random_matrix(rng, out, in), Vector::Zero(out), Activation::Identity}});
  const Matrix x = testing::random_matrix(rng, b, in);
  const Matrix t = testing::random_matrix(rng, b, out);
  const auto trace = forward(net, x);
  const auto loss = mse_loss(trace.output(), t);
  const auto g = backward(net, trace, loss.grad);
  // d/dW of (1/(B P)) sum (xW' - t)^2 = (2/(B P)) err' x
  const Matrix err = x * net.layers()[0].weights.transpose() - t;
  const Matrix expected = (2.0 / double(b * out)) * err.transpose() * x;
  CHECK((g.weights[0] - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adam step examples") {
  Network net({Layer{Matrix::Constant(1, 1, 0.3), Vector::Constant(1, -0.2), Activation::Identity}});
  const auto start = net;
  AdamState zero_state(net);
  auto g = Gradients::zeros_like(net);
  for (int i = 0; i < 5; ++i) adam_step(zero_state, net, g, 0.1);
  CHECK(net == start);

  AdamState state(net);
  g.weights[0](0, 0) = 1.0;
  g.bias[0](0) = 1.0;
  adam_step(state, net, g, 0.1);
  // m_hat = 1, v_hat = 1, step = lr * 1 / (1 + eps)
  const double expected = 0.1 / (1.0 + 1e-8);
  CHECK(std::abs((start.layers()[0].weights(0, 0) - net.layers()[0].weights(0, 0)) - expected) < 1e-15);
  CHECK(std::abs((start.layers()[0].bias(0) - net.layers()[0].bias(0)) - expected) < 1e-15);

  Network a = start, b = start;
  AdamState sa(a), sb(b);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    auto step = Gradients::zeros_like(a);
    step.weights[0](0, 0) = rng.normal();
    step.bias[0](0) = rng.normal();
    adam_step(sa, a, step, 0.01);
    adam_step(sb, b, step, 0.01);
  }
  CHECK(a == b);
}

TEST_CASE("adam matches a hand-rolled reference over several steps") {
  Network net({Layer{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::Identity}});
  AdamState state(net);
  double w = 1.0, m = 0, v = 0;
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= 10; ++t) {
    const double grad = 2 * w - 1;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    w -= lr * mh / (std::sqrt(vh) + eps);
    auto g = Gradients::zeros_like(net);
    g.weights[0](0, 0) = 2 * net.layers()[0].weights(0, 0) - 1;
    adam_step(state, net, g, lr);
    CHECK(std::abs(net.layers()[0].weights(0, 0) - w) < 1e-14);
  }
}

TEST_CASE("network checkpoints round-trip bit-exactly") {
  Rng rng(6);
  const auto net = random_net(rng, 77);
  std::stringstream ss;
  save_network(net, ss);
  const auto back = load_network(ss);
  CHECK(back == net);
}
