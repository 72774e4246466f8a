#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "balmse/losses.hpp"
#include "balmse/nn.hpp"
#include "balmse/tabular.hpp"

namespace balmse {

/// Tanh outputs are read through x = (y - low) / (high - low), so scaled
/// targets in [0, 1] sit inside the open range of the activation.
inline constexpr double kTanhTargetLow = 0.05;
inline constexpr double kTanhTargetHigh = 0.95;

struct AutoencoderConfig {
  std::size_t dim_z = 10;
  std::size_t epochs = 1000;
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  LossSpec loss = LossSpec::standard();
  std::uint64_t seed = 0;
};

/// Widths p, p-q, p-2q, p-3q, dim_z, p-3q, p-2q, p-q, p with q = p / 10.
std::vector<Eigen::Index> autoencoder_widths(std::size_t p, std::size_t dim_z);

/// Four encoder layers followed by four decoder layers, Tanh throughout.
/// Cross-entropy training swaps the last activation to Identity so the
/// decoder emits logits.
Network build_autoencoder(std::size_t p, std::size_t dim_z, std::uint64_t seed,
                          Activation output = Activation::Tanh);

inline constexpr std::size_t kAutoencoderEncoderDepth = 4;
inline constexpr std::size_t kCurveCheckpoints = 10;

/// Per-feature mean squared reconstruction error on the training set,
/// sampled every epochs/10.
struct LearningCurve {
  std::vector<std::size_t> checkpoints;  // epoch numbers
  std::vector<std::string> features;
  Matrix errors;  // checkpoints x features

  /// Columns: checkpoint,feature,error
  void write_csv(const std::filesystem::path& path) const;
};

/// Epochs after which the curve is sampled: ceil(k * epochs / 10), k = 1..10.
std::vector<std::size_t> checkpoint_epochs(std::size_t epochs);

struct TrainedAutoencoder {
  Network net;  // encoder layers then decoder layers
  std::shared_ptr<const EncoderState> encoder_state;
  LossWeights weights;
  AutoencoderConfig config;
  LearningCurve curve;

  Network encoder() const { return net.slice(0, kAutoencoderEncoderDepth); }
  Network decoder() const { return net.slice(kAutoencoderEncoderDepth, net.depth()); }
  /// Network output mapped back to the encoded feature space.
  Matrix reconstruct_encoded(const Matrix& encoded) const;
};

/// Mini-batch Adam on the configured loss with inputs as targets. When
/// `weights` is empty, balanced and blended losses use
/// compute_balance_weights on the training encoder.
TrainedAutoencoder train_autoencoder(const EncodedMatrix& train, const AutoencoderConfig& config,
                                     std::optional<LossWeights> weights = std::nullopt);

/// Encode, pass through the autoencoder, hard-decode. The input target, if
/// any, is carried over unchanged.
Dataset reconstruct(const TrainedAutoencoder& model, const Dataset& data);

/// Encoder output, n x dim_z.
Matrix latent(const TrainedAutoencoder& model, const Dataset& data);

/// Checkpoint: one JSON header line (schema hash, config, encoder
/// statistics), then the network in the nn text format.
void save_autoencoder(const TrainedAutoencoder& model, std::ostream& out);
TrainedAutoencoder load_autoencoder(std::istream& in);

// ------------------------------------------------------------------ VAE

struct VaeConfig {
  std::size_t dim_hl = 20;
  std::size_t dim_z = 10;
  std::size_t epochs = 1000;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  LossSpec loss = LossSpec::standard();
  std::uint64_t seed = 0;
  double kl_weight = 1.0;
};

/// HL1: p -> hl (Tanh); HL21/HL22: hl -> z (mean, log-variance);
/// HL3: z -> hl (Tanh); HL41: hl -> p (features); HL42: hl -> 1 (target).
struct VaeNetworks {
  Network hl1, hl21, hl22, hl3, hl41, hl42;
};

VaeNetworks build_vae(std::size_t p, const VaeConfig& config);

struct TrainedVae {
  VaeNetworks nets;
  std::shared_ptr<const EncoderState> encoder_state;
  LossWeights weights;
  double target_min = 0.0;
  double target_max = 1.0;
  VaeConfig config;
  std::vector<std::size_t> checkpoints;
  std::vector<double> loss_history;  // mean training loss at each checkpoint
};

/// mu + exp(logvar / 2) * eps, element-wise.
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise);

/// KL(N(mu, exp(logvar)) || N(0, I)) summed over latent units, averaged over rows.
double gaussian_kl(const Matrix& mu, const Matrix& logvar);

struct VaeLossResult {
  double value = 0.0;
  double reconstruction = 0.0;
  double target = 0.0;
  double kl = 0.0;
  Matrix grad_x, grad_y, grad_mu, grad_logvar;
};

/// Chosen loss on the feature block + plain MSE on the target head +
/// kl_weight * gaussian_kl.
VaeLossResult vae_loss(const Matrix& x_pred, const Matrix& x_true, const Matrix& y_pred, const Matrix& y_true,
                       const Matrix& mu, const Matrix& logvar, const LossWeights& weights, const LossSpec& loss,
                       const EncoderState& enc, double kl_weight = 1.0);

/// `train` must carry a target. Fits the encoder on `train`.
TrainedVae train_vae(const Dataset& train, const VaeConfig& config);

/// Deterministic reconstruction through the posterior mean.
Dataset vae_reconstruct(const TrainedVae& model, const Dataset& data);

/// z ~ N(0, I), decoded and hard-decoded; the target head becomes the target.
Dataset vae_generate(const TrainedVae& model, std::size_t count, std::uint64_t seed);

void save_vae(const TrainedVae& model, std::ostream& out);

}  // namespace balmse
