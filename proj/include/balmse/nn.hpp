#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "balmse/tabular.hpp"

namespace balmse {

enum class Activation { Tanh, Identity };

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Tanh;

  Eigen::Index in() const { return weights.cols(); }
  Eigen::Index out() const { return weights.rows(); }
};

/// Dense feed-forward network. Rows of a batch are samples.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  Eigen::Index input_width() const;
  Eigen::Index output_width() const;
  std::size_t parameter_count() const;

  /// Layers [first, last) as a standalone network.
  Network slice(std::size_t first, std::size_t last) const;

  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
};

/// Pre- and post-activation values of every layer for one batch.
struct Trace {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& output() const { return post.empty() ? input : post.back(); }
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  static Gradients zeros_like(const Network& net);
  Gradients& operator+=(const Gradients& other);
  double max_abs() const;
};

/// Glorot-uniform weights, zero biases.
Network init_network(std::span<const Eigen::Index> dims, std::span<const Activation> activations,
                     std::uint64_t seed);

Trace forward(const Network& net, const Matrix& batch);
Matrix predict(const Network& net, const Matrix& batch);

/// Reverse-mode pass for a scalar loss whose gradient w.r.t. the network
/// output is `grad_output`. When `grad_input` is non-null it receives the
/// gradient w.r.t. the batch input.
Gradients backward(const Network& net, const Trace& trace, const Matrix& grad_output,
                   Matrix* grad_input = nullptr);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  Gradients first_moment;
  Gradients second_moment;

  AdamState() = default;
  explicit AdamState(const Network& net);
};

void adam_step(AdamState& state, Network& net, const Gradients& grads, double learning_rate);

/// Text checkpoint: `layers <L>` then per layer `<in> <out> <tanh|identity>`
/// followed by row-major weights and the bias, all as hex floats, so the
/// round trip is bit-exact.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);

std::string to_string(Activation activation);

}  // namespace balmse
