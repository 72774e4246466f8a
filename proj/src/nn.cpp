#include "balmse/nn.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "balmse/errors.hpp"
#include "balmse/rng.hpp"

namespace balmse {

std::string to_string(Activation activation) {
  return activation == Activation::Tanh ? "tanh" : "identity";
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    require(layer.bias.size() == layer.out(), ErrorKind::DimensionError,
            "layer " + std::to_string(k) + " bias does not match its output width");
    if (k > 0) {
      require(layer.in() == layers_[k - 1].out(), ErrorKind::DimensionError,
              "layer " + std::to_string(k) + " input width does not chain");
    }
    require(layer.weights.allFinite() && layer.bias.allFinite(), ErrorKind::NonFinite,
            "layer " + std::to_string(k) + " has non-finite parameters");
  }
}

Eigen::Index Network::input_width() const { return layers_.empty() ? 0 : layers_.front().in(); }
Eigen::Index Network::output_width() const { return layers_.empty() ? 0 : layers_.back().out(); }

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return total;
}

Network Network::slice(std::size_t first, std::size_t last) const {
  require(first <= last && last <= layers_.size(), ErrorKind::DimensionError, "bad layer slice");
  return Network(std::vector<Layer>(layers_.begin() + static_cast<std::ptrdiff_t>(first),
                                    layers_.begin() + static_cast<std::ptrdiff_t>(last)));
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& a = layers_[k];
    const auto& b = other.layers_[k];
    if (a.activation != b.activation || a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols())
      return false;
    if (a.weights != b.weights || a.bias != b.bias) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weights.push_back(Matrix::Zero(l.out(), l.in()));
    g.bias.push_back(Vector::Zero(l.out()));
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  require(weights.size() == other.weights.size(), ErrorKind::ShapeError, "gradient shapes differ");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += other.weights[k];
    bias[k] += other.bias[k];
  }
  return *this;
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].size()) m = std::max(m, weights[k].cwiseAbs().maxCoeff());
    if (bias[k].size()) m = std::max(m, bias[k].cwiseAbs().maxCoeff());
  }
  return m;
}

Network init_network(std::span<const Eigen::Index> dims, std::span<const Activation> activations,
                     std::uint64_t seed) {
  require(dims.size() >= 2, ErrorKind::DimensionError, "a network needs at least two widths");
  require(activations.size() == dims.size() - 1, ErrorKind::DimensionError,
          "need one activation per layer (" + std::to_string(dims.size() - 1) + ")");
  for (auto d : dims) require(d > 0, ErrorKind::DimensionError, "layer widths must be positive");

  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = dims[k];
    const auto out = dims[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer{Matrix(out, in), Vector::Zero(out), activations[k]};
    // Row-major fill order keeps the stream independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Trace forward(const Network& net, const Matrix& batch) {
  require(batch.cols() == net.input_width(), ErrorKind::ShapeError,
          "batch width " + std::to_string(batch.cols()) + " != network input width " +
              std::to_string(net.input_width()));
  Trace trace;
  trace.input = batch;
  trace.pre.reserve(net.depth());
  trace.post.reserve(net.depth());
  const Matrix* current = &trace.input;
  for (const auto& layer : net.layers()) {
    Matrix z = (*current) * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    Matrix a = layer.activation == Activation::Tanh ? Matrix(z.array().tanh()) : z;
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
    current = &trace.post.back();
  }
  return trace;
}

Matrix predict(const Network& net, const Matrix& batch) { return forward(net, batch).output(); }

Gradients backward(const Network& net, const Trace& trace, const Matrix& grad_output, Matrix* grad_input) {
  const auto depth = net.depth();
  require(trace.post.size() == depth, ErrorKind::ShapeError, "trace does not belong to this network");
  const auto& out = trace.output();
  require(grad_output.rows() == out.rows() && grad_output.cols() == out.cols(), ErrorKind::ShapeError,
          "output gradient shape does not match the network output");

  Gradients grads;
  grads.weights.resize(depth);
  grads.bias.resize(depth);
  Matrix delta = grad_output;
  for (std::size_t k = depth; k-- > 0;) {
    const auto& layer = net.layers()[k];
    if (layer.activation == Activation::Tanh) {
      delta.array() *= 1.0 - trace.post[k].array().square();
    }
    const Matrix& layer_input = k == 0 ? trace.input : trace.post[k - 1];
    grads.weights[k] = delta.transpose() * layer_input;
    grads.bias[k] = delta.colwise().sum().transpose();
    if (k > 0 || grad_input != nullptr) {
      Matrix next = delta * layer.weights;
      delta = std::move(next);
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(delta);
  return grads;
}

AdamState::AdamState(const Network& net)
    : first_moment(Gradients::zeros_like(net)), second_moment(Gradients::zeros_like(net)) {}

void adam_step(AdamState& state, Network& net, const Gradients& grads, double learning_rate) {
  auto& layers = net.layers();
  require(grads.weights.size() == layers.size() && state.first_moment.weights.size() == layers.size(),
          ErrorKind::ShapeError, "adam_step: shapes are not congruent");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.epsilon);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weights, grads.weights[k], state.first_moment.weights[k], state.second_moment.weights[k]);
    update(layers[k].bias, grads.bias[k], state.first_moment.bias[k], state.second_moment.bias[k]);
  }
}

namespace {

void write_hex(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  out << buf;
}

double read_hex(std::istream& in) {
  std::string token;
  require(static_cast<bool>(in >> token), ErrorKind::IoError, "truncated network checkpoint");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  require(end != nullptr && *end == '\0', ErrorKind::IoError, "bad number in checkpoint: " + token);
  return v;
}

}  // namespace

void save_network(const Network& net, std::ostream& out) {
  out << "layers " << net.depth() << '\n';
  for (const auto& layer : net.layers()) {
    out << layer.in() << ' ' << layer.out() << ' ' << to_string(layer.activation) << '\n';
    for (Eigen::Index r = 0; r < layer.out(); ++r) {
      for (Eigen::Index c = 0; c < layer.in(); ++c) {
        if (c) out << ' ';
        write_hex(out, layer.weights(r, c));
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < layer.out(); ++r) {
      if (r) out << ' ';
      write_hex(out, layer.bias(r));
    }
    out << '\n';
  }
}

Network load_network(std::istream& in) {
  std::string keyword;
  std::size_t depth = 0;
  require(static_cast<bool>(in >> keyword >> depth) && keyword == "layers", ErrorKind::IoError,
          "checkpoint does not start with 'layers'");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < depth; ++k) {
    Eigen::Index n_in = 0, n_out = 0;
    std::string act;
    require(static_cast<bool>(in >> n_in >> n_out >> act), ErrorKind::IoError, "truncated layer header");
    require(n_in > 0 && n_out > 0, ErrorKind::IoError, "bad layer dimensions in checkpoint");
    require(act == "tanh" || act == "identity", ErrorKind::IoError, "unknown activation '" + act + "'");
    Layer layer{Matrix(n_out, n_in), Vector(n_out), act == "tanh" ? Activation::Tanh : Activation::Identity};
    for (Eigen::Index r = 0; r < n_out; ++r) {
      for (Eigen::Index c = 0; c < n_in; ++c) layer.weights(r, c) = read_hex(in);
    }
    for (Eigen::Index r = 0; r < n_out; ++r) layer.bias(r) = read_hex(in);
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

}  // namespace balmse
