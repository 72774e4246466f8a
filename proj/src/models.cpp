#include "balmse/models.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "balmse/errors.hpp"
#include "balmse/rng.hpp"
#include "json.hpp"

namespace balmse {

namespace {

constexpr double kTanhSpan = kTanhTargetHigh - kTanhTargetLow;

bool uses_logits(const LossSpec& loss) { return loss.kind == LossKind::CrossEntropy; }

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

/// Softmax over each categorical group, numerics untouched.
Matrix group_softmax(const Matrix& logits, const EncoderState& enc) {
  Matrix out = logits;
  const auto& schema = enc.schema();
  for (std::size_t q = 0; q < schema.size(); ++q) {
    if (!schema.column(q).is_categorical()) continue;
    const auto off = static_cast<Eigen::Index>(enc.offset(q));
    const auto width = static_cast<Eigen::Index>(schema.column(q).category_count());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      auto seg = out.row(i).segment(off, width);
      const double peak = seg.maxCoeff();
      seg = (seg.array() - peak).exp().matrix();
      seg /= seg.sum();
    }
  }
  return out;
}

LossWeights resolve_weights(const LossSpec& loss, const EncoderState& enc, std::optional<LossWeights> weights) {
  if (weights) {
    require(static_cast<std::size_t>(weights->size()) == enc.width(), ErrorKind::ShapeError,
            "loss weights do not match the encoded width");
    return std::move(*weights);
  }
  return loss.needs_weights() ? compute_balance_weights(enc) : unit_weights(enc);
}

void check_finite(double value, const std::string& where) {
  require(std::isfinite(value), ErrorKind::NonFinite, "loss became non-finite " + where);
}

std::string epoch_where(std::size_t epoch, std::size_t batch) {
  return "at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch);
}

}  // namespace

std::vector<Eigen::Index> autoencoder_widths(std::size_t p, std::size_t dim_z) {
  require(dim_z >= 1, ErrorKind::DegenerateWidth, "dim_z must be positive");
  const auto pp = static_cast<Eigen::Index>(p);
  const auto z = static_cast<Eigen::Index>(dim_z);
  const Eigen::Index q = pp / 10;
  std::vector<Eigen::Index> widths{pp, pp - q, pp - 2 * q, pp - 3 * q, z, pp - 3 * q, pp - 2 * q, pp - q, pp};
  for (Eigen::Index k : {pp, pp - q, pp - 2 * q, pp - 3 * q}) {
    require(k > 0 && k > z, ErrorKind::DegenerateWidth,
            "autoencoder width " + std::to_string(k) + " is not above dim_z=" + std::to_string(dim_z) +
                " (p=" + std::to_string(p) + ")");
  }
  return widths;
}

Network build_autoencoder(std::size_t p, std::size_t dim_z, std::uint64_t seed, Activation output) {
  const auto widths = autoencoder_widths(p, dim_z);
  std::vector<Activation> acts(widths.size() - 1, Activation::Tanh);
  acts.back() = output;
  return init_network(widths, acts, seed);
}

std::vector<std::size_t> checkpoint_epochs(std::size_t epochs) {
  require(epochs >= 1, ErrorKind::ConfigError, "epochs must be at least 1");
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= kCurveCheckpoints; ++k) out.push_back((k * epochs + kCurveCheckpoints - 1) / kCurveCheckpoints);
  return out;
}

void LearningCurve::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  out << "checkpoint,feature,error\n";
  char buf[64];
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    for (std::size_t f = 0; f < features.size(); ++f) {
      std::snprintf(buf, sizeof(buf), "%.17g", errors(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f)));
      out << checkpoints[c] << ',' << features[f] << ',' << buf << '\n';
    }
  }
}

Matrix TrainedAutoencoder::reconstruct_encoded(const Matrix& encoded) const {
  Matrix out = predict(net, encoded);
  if (uses_logits(config.loss)) return out;
  return (out.array() - kTanhTargetLow) / kTanhSpan;
}

namespace {

/// Per-feature squared error of the model's reconstruction of `train`;
/// categorical groups of a logit model are compared as probabilities.
Vector per_feature_error(const TrainedAutoencoder& model, const Matrix& train) {
  Matrix recon = model.reconstruct_encoded(train);
  if (uses_logits(model.config.loss)) recon = group_softmax(recon, *model.encoder_state);
  return (train - recon).array().square().colwise().mean().transpose();
}

}  // namespace

TrainedAutoencoder train_autoencoder(const EncodedMatrix& train, const AutoencoderConfig& config,
                                     std::optional<LossWeights> weights) {
  require(train.encoder != nullptr, ErrorKind::ShapeError, "encoded matrix carries no encoder");
  require(config.epochs >= 1 && config.batch_size >= 1, ErrorKind::ConfigError, "epochs and batch_size must be >= 1");
  require(config.learning_rate > 0.0, ErrorKind::ConfigError, "learning rate must be positive");
  const auto& enc = *train.encoder;
  const auto p = enc.width();
  require(static_cast<std::size_t>(train.cols()) == p, ErrorKind::ShapeError, "matrix width differs from encoder");
  require(train.rows() >= 1, ErrorKind::ShapeError, "no training rows");

  TrainedAutoencoder model;
  model.encoder_state = train.encoder;
  model.config = config;
  model.weights = resolve_weights(config.loss, enc, std::move(weights));
  const bool logits = uses_logits(config.loss);
  model.net = build_autoencoder(p, config.dim_z, derive_seed(config.seed, 0),
                                logits ? Activation::Identity : Activation::Tanh);

  model.curve.checkpoints = checkpoint_epochs(config.epochs);
  model.curve.features = enc.feature_names();
  model.curve.errors.resize(static_cast<Eigen::Index>(kCurveCheckpoints), static_cast<Eigen::Index>(p));

  AdamState adam(model.net);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  const auto n = static_cast<std::size_t>(train.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t next_checkpoint = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const auto count = std::min(config.batch_size, n - start);
      const Matrix batch = gather_rows(train.values, std::span<const std::size_t>(order).subspan(start, count));
      const Trace trace = forward(model.net, batch);
      LossResult loss;
      if (logits) {
        loss = cross_entropy_loss(trace.output(), batch, enc);
      } else {
        const Matrix recon = (trace.output().array() - kTanhTargetLow) / kTanhSpan;
        loss = evaluate_loss(config.loss, recon, batch, model.weights, enc);
        loss.grad /= kTanhSpan;
      }
      check_finite(loss.value, epoch_where(epoch, batch_index));
      const Gradients grads = backward(model.net, trace, loss.grad);
      adam_step(adam, model.net, grads, config.learning_rate);
    }
    while (next_checkpoint < kCurveCheckpoints && model.curve.checkpoints[next_checkpoint] == epoch) {
      const Vector errors = per_feature_error(model, train.values);
      require(errors.allFinite(), ErrorKind::NonFinite, "learning curve became non-finite at epoch " + std::to_string(epoch));
      model.curve.errors.row(static_cast<Eigen::Index>(next_checkpoint)) = errors.transpose();
      ++next_checkpoint;
    }
  }
  return model;
}

Dataset reconstruct(const TrainedAutoencoder& model, const Dataset& data) {
  const auto encoded = encode(data, model.encoder_state);
  Dataset out = decode(model.reconstruct_encoded(encoded.values), *model.encoder_state);
  if (data.has_target()) return out.with_target(data.target(), data.target_name());
  return out;
}

Matrix latent(const TrainedAutoencoder& model, const Dataset& data) {
  const auto encoded = encode(data, model.encoder_state);
  return predict(model.encoder(), encoded.values);
}

// ------------------------------------------------------------------ checkpoints

namespace {

using nlohmann::json;

json encoder_to_json(const EncoderState& enc) {
  json columns = json::array();
  for (std::size_t j = 0; j < enc.schema().size(); ++j) {
    const auto& col = enc.schema().column(j);
    json c{{"name", col.name}, {"kind", col.is_categorical() ? "categorical" : "numeric"}};
    if (col.is_categorical()) {
      c["categories"] = col.categories;
      c["counts"] = enc.counts(j);
    } else {
      c["min"] = enc.min(j);
      c["max"] = enc.max(j);
    }
    columns.push_back(std::move(c));
  }
  return json{{"rows", enc.rows()}, {"columns", std::move(columns)}};
}

EncoderState encoder_from_json(const json& j) {
  std::vector<Column> columns;
  std::vector<double> mins, maxs;
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& c : j.at("columns")) {
    Column col;
    col.name = c.at("name").get<std::string>();
    if (c.at("kind") == "categorical") {
      col.kind = ColumnKind::Categorical;
      col.categories = c.at("categories").get<std::vector<std::string>>();
      counts.push_back(c.at("counts").get<std::vector<std::size_t>>());
      mins.push_back(std::numeric_limits<double>::quiet_NaN());
      maxs.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      counts.emplace_back();
      mins.push_back(c.at("min").get<double>());
      maxs.push_back(c.at("max").get<double>());
    }
    columns.push_back(std::move(col));
  }
  return EncoderState(Schema(std::move(columns)), j.at("rows").get<std::size_t>(), std::move(mins), std::move(maxs),
                      std::move(counts));
}

std::string hex_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void save_autoencoder(const TrainedAutoencoder& model, std::ostream& out) {
  const auto& cfg = model.config;
  json header{{"format", "balmse-autoencoder-v1"},
              {"schema_hash", hex_hash(model.encoder_state->schema().hash())},
              {"seed", cfg.seed},
              {"config",
               {{"dim_z", cfg.dim_z},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"learning_rate", cfg.learning_rate},
                {"loss", to_string(cfg.loss)}}},
              {"encoder", encoder_to_json(*model.encoder_state)}};
  out << header.dump() << '\n';
  save_network(model.net, out);
}

TrainedAutoencoder load_autoencoder(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::IoError, "empty checkpoint");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::IoError, std::string("bad checkpoint header: ") + e.what());
  }
  require(header.value("format", "") == "balmse-autoencoder-v1", ErrorKind::IoError, "not an autoencoder checkpoint");
  TrainedAutoencoder model;
  model.encoder_state = std::make_shared<const EncoderState>(encoder_from_json(header.at("encoder")));
  require(hex_hash(model.encoder_state->schema().hash()) == header.at("schema_hash").get<std::string>(),
          ErrorKind::IoError, "checkpoint schema hash mismatch");
  const auto& c = header.at("config");
  model.config.dim_z = c.at("dim_z").get<std::size_t>();
  model.config.epochs = c.at("epochs").get<std::size_t>();
  model.config.batch_size = c.at("batch_size").get<std::size_t>();
  model.config.learning_rate = c.at("learning_rate").get<double>();
  model.config.loss = parse_loss(c.at("loss").get<std::string>());
  model.config.seed = header.at("seed").get<std::uint64_t>();
  model.weights = resolve_weights(model.config.loss, *model.encoder_state, std::nullopt);
  model.net = load_network(in);
  return model;
}

// ------------------------------------------------------------------ VAE

VaeNetworks build_vae(std::size_t p, const VaeConfig& config) {
  require(p >= 1 && config.dim_hl >= 1 && config.dim_z >= 1, ErrorKind::DegenerateWidth, "VAE widths must be positive");
  const auto pp = static_cast<Eigen::Index>(p);
  const auto hl = static_cast<Eigen::Index>(config.dim_hl);
  const auto z = static_cast<Eigen::Index>(config.dim_z);
  auto layer = [&](Eigen::Index in, Eigen::Index out, Activation act, std::uint64_t stream) {
    const std::array<Eigen::Index, 2> dims{in, out};
    const std::array<Activation, 1> acts{act};
    return init_network(dims, acts, derive_seed(config.seed, 100 + stream));
  };
  return VaeNetworks{layer(pp, hl, Activation::Tanh, 1),     layer(hl, z, Activation::Identity, 21),
                     layer(hl, z, Activation::Identity, 22), layer(z, hl, Activation::Tanh, 3),
                     layer(hl, pp, Activation::Identity, 41), layer(hl, 1, Activation::Identity, 42)};
}

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise) {
  require(mu.rows() == logvar.rows() && mu.cols() == logvar.cols() && mu.rows() == noise.rows() &&
              mu.cols() == noise.cols(),
          ErrorKind::ShapeError, "reparameterize: mu, logvar and noise must share a shape");
  return mu.array() + (0.5 * logvar.array()).exp() * noise.array();
}

double gaussian_kl(const Matrix& mu, const Matrix& logvar) {
  require(mu.rows() == logvar.rows() && mu.cols() == logvar.cols() && mu.rows() > 0, ErrorKind::ShapeError,
          "gaussian_kl: mu and logvar must share a non-empty shape");
  const double total = -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum();
  return total / static_cast<double>(mu.rows());
}

VaeLossResult vae_loss(const Matrix& x_pred, const Matrix& x_true, const Matrix& y_pred, const Matrix& y_true,
                       const Matrix& mu, const Matrix& logvar, const LossWeights& weights, const LossSpec& loss,
                       const EncoderState& enc, double kl_weight) {
  require(x_pred.rows() == y_pred.rows() && x_pred.rows() == mu.rows(), ErrorKind::ShapeError,
          "vae_loss: batch sizes differ");
  VaeLossResult r;
  auto recon = evaluate_loss(loss, x_pred, x_true, weights, enc);
  auto target = mse_loss(y_pred, y_true);
  r.reconstruction = recon.value;
  r.target = target.value;
  r.kl = gaussian_kl(mu, logvar);
  r.value = r.reconstruction + r.target + kl_weight * r.kl;
  r.grad_x = std::move(recon.grad);
  r.grad_y = std::move(target.grad);
  const double rows = static_cast<double>(mu.rows());
  r.grad_mu = kl_weight * mu / rows;
  r.grad_logvar = (kl_weight * 0.5 / rows) * (logvar.array().exp() - 1.0).matrix();
  return r;
}

namespace {

struct VaeAdam {
  AdamState hl1, hl21, hl22, hl3, hl41, hl42;
  explicit VaeAdam(const VaeNetworks& n) : hl1(n.hl1), hl21(n.hl21), hl22(n.hl22), hl3(n.hl3), hl41(n.hl41), hl42(n.hl42) {}
};

Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix scaled_target(const Dataset& data, double lo, double hi) {
  const auto& y = data.target();
  Matrix out(static_cast<Eigen::Index>(y.size()), 1);
  for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = (y[i] - lo) / (hi - lo);
  return out;
}

}  // namespace

TrainedVae train_vae(const Dataset& train, const VaeConfig& config) {
  require(train.has_target(), ErrorKind::SchemaMismatch, "VAE training data needs a target");
  require(config.epochs >= 1 && config.batch_size >= 1, ErrorKind::ConfigError, "epochs and batch_size must be >= 1");
  TrainedVae model;
  model.config = config;
  model.encoder_state = std::make_shared<const EncoderState>(fit_encoder(train));
  const auto& enc = *model.encoder_state;
  model.weights = resolve_weights(config.loss, enc, std::nullopt);
  const auto& y = train.target();
  auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  require(*hi > *lo, ErrorKind::ConstantNumeric, "VAE target is constant");
  model.target_min = *lo;
  model.target_max = *hi;

  const Matrix x_all = encode(train, model.encoder_state).values;
  const Matrix y_all = scaled_target(train, model.target_min, model.target_max);
  model.nets = build_vae(enc.width(), config);
  auto& nets = model.nets;
  VaeAdam adam(nets);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  Rng noise_rng(derive_seed(config.seed, 2));
  model.checkpoints = checkpoint_epochs(config.epochs);
  std::size_t next_checkpoint = 0;

  const auto n = train.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double lr = config.learning_rate;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, n - start));
      const Matrix x = gather_rows(x_all, rows);
      const Matrix yb = gather_rows(y_all, rows);

      const Trace t1 = forward(nets.hl1, x);
      const Trace t21 = forward(nets.hl21, t1.output());
      const Trace t22 = forward(nets.hl22, t1.output());
      const Matrix& mu = t21.output();
      const Matrix& logvar = t22.output();
      const Matrix eps = standard_normal(noise_rng, mu.rows(), mu.cols());
      const Matrix z = reparameterize(mu, logvar, eps);
      const Trace t3 = forward(nets.hl3, z);
      const Trace t41 = forward(nets.hl41, t3.output());
      const Trace t42 = forward(nets.hl42, t3.output());

      const auto loss = vae_loss(t41.output(), x, t42.output(), yb, mu, logvar, model.weights, config.loss, enc,
                                 config.kl_weight);
      check_finite(loss.value, epoch_where(epoch, batch_index));
      epoch_loss += loss.value * static_cast<double>(rows.size());

      Matrix d_h3_x, d_h3_y, d_z, d_h1_mu, d_h1_lv;
      const auto g41 = backward(nets.hl41, t41, loss.grad_x, &d_h3_x);
      const auto g42 = backward(nets.hl42, t42, loss.grad_y, &d_h3_y);
      const auto g3 = backward(nets.hl3, t3, d_h3_x + d_h3_y, &d_z);
      const Matrix d_mu = d_z + loss.grad_mu;
      const Matrix d_logvar =
          (d_z.array() * 0.5 * (0.5 * logvar.array()).exp() * eps.array()).matrix() + loss.grad_logvar;
      const auto g21 = backward(nets.hl21, t21, d_mu, &d_h1_mu);
      const auto g22 = backward(nets.hl22, t22, d_logvar, &d_h1_lv);
      const auto g1 = backward(nets.hl1, t1, d_h1_mu + d_h1_lv);

      adam_step(adam.hl1, nets.hl1, g1, lr);
      adam_step(adam.hl21, nets.hl21, g21, lr);
      adam_step(adam.hl22, nets.hl22, g22, lr);
      adam_step(adam.hl3, nets.hl3, g3, lr);
      adam_step(adam.hl41, nets.hl41, g41, lr);
      adam_step(adam.hl42, nets.hl42, g42, lr);
    }
    while (next_checkpoint < model.checkpoints.size() && model.checkpoints[next_checkpoint] == epoch) {
      model.loss_history.push_back(epoch_loss / static_cast<double>(n));
      ++next_checkpoint;
    }
  }
  return model;
}

namespace {

Matrix decode_features(const TrainedVae& model, const Matrix& z, Matrix* target_head) {
  const Matrix h3 = predict(model.nets.hl3, z);
  if (target_head != nullptr) *target_head = predict(model.nets.hl42, h3);
  return predict(model.nets.hl41, h3);
}

}  // namespace

Dataset vae_reconstruct(const TrainedVae& model, const Dataset& data) {
  const auto encoded = encode(data, model.encoder_state);
  const Matrix mu = predict(model.nets.hl21, predict(model.nets.hl1, encoded.values));
  Dataset out = decode(decode_features(model, mu, nullptr), *model.encoder_state);
  if (data.has_target()) return out.with_target(data.target(), data.target_name());
  return out;
}

Dataset vae_generate(const TrainedVae& model, std::size_t count, std::uint64_t seed) {
  require(count >= 1, ErrorKind::ShapeError, "vae_generate needs count >= 1");
  Rng rng(seed);
  const Matrix z = standard_normal(rng, static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(model.config.dim_z));
  Matrix head;
  const Matrix x = decode_features(model, z, &head);
  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    y[i] = model.target_min + head(static_cast<Eigen::Index>(i), 0) * (model.target_max - model.target_min);
  }
  return decode(x, *model.encoder_state).with_target(std::move(y));
}

void save_vae(const TrainedVae& model, std::ostream& out) {
  const auto& cfg = model.config;
  json header{{"format", "balmse-vae-v1"},
              {"schema_hash", hex_hash(model.encoder_state->schema().hash())},
              {"seed", cfg.seed},
              {"config",
               {{"dim_hl", cfg.dim_hl},
                {"dim_z", cfg.dim_z},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"learning_rate", cfg.learning_rate},
                {"kl_weight", cfg.kl_weight},
                {"loss", to_string(cfg.loss)}}},
              {"target", {{"min", model.target_min}, {"max", model.target_max}}},
              {"encoder", encoder_to_json(*model.encoder_state)}};
  out << header.dump() << '\n';
  for (const Network* net : {&model.nets.hl1, &model.nets.hl21, &model.nets.hl22, &model.nets.hl3, &model.nets.hl41,
                             &model.nets.hl42}) {
    save_network(*net, out);
  }
}

}  // namespace balmse
