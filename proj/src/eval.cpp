#include "balmse/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "balmse/errors.hpp"
#include "balmse/metrics.hpp"
#include "balmse/rng.hpp"

namespace balmse {

// ------------------------------------------------------------------ proxies

Vector LinearModel::predict(const Matrix& x) const {
  require(x.cols() == coefficients.size(), ErrorKind::ShapeError, "feature width does not match the model");
  return (x * coefficients).array() + intercept;
}

LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double lambda) {
  require(static_cast<std::size_t>(x.rows()) == y.size(), ErrorKind::LengthMismatch, "ridge_fit: one target per row");
  require(x.rows() >= 1, ErrorKind::LengthMismatch, "ridge_fit: no rows");
  require(lambda >= 0.0, ErrorKind::ConfigError, "ridge lambda must be non-negative");
  const Eigen::Map<const Vector> target(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = target.mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = target.array() - y_mean;
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  LinearModel model;
  model.coefficients = gram.completeOrthogonalDecomposition().solve(xc.transpose() * yc);
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

Vector sigmoid(const Vector& z) {
  return z.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

double logistic_objective(const LinearModel& model, const Matrix& x, std::span<const int> y, double lambda,
                          Vector* grad) {
  const auto n = x.rows();
  require(static_cast<std::size_t>(n) == y.size(), ErrorKind::LengthMismatch, "logistic: one label per row");
  const Vector z = model.predict(x);
  double loss = 0.0;
  Vector residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = y[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
    // log(1 + exp(z)) - t z, computed stably
    const double zi = z(i);
    const double softplus = zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
    loss += softplus - t * zi;
    residual(i) = (zi >= 0 ? 1.0 / (1.0 + std::exp(-zi)) : std::exp(zi) / (1.0 + std::exp(zi))) - t;
  }
  const double rows = static_cast<double>(n);
  loss = loss / rows + 0.5 * lambda * model.coefficients.squaredNorm();
  if (grad != nullptr) {
    grad->resize(model.coefficients.size() + 1);
    grad->head(model.coefficients.size()) = x.transpose() * residual / rows + lambda * model.coefficients;
    (*grad)(model.coefficients.size()) = residual.sum() / rows;
  }
  return loss;
}

LinearModel logistic_fit(const Matrix& x, std::span<const int> y, const LogisticOptions& options) {
  require(static_cast<std::size_t>(x.rows()) == y.size() && x.rows() > 0, ErrorKind::LengthMismatch,
          "logistic_fit: one label per row");
  LinearModel model{Vector::Zero(x.cols()), 0.0};
  Vector grad;
  for (std::size_t step = 0; step < options.steps; ++step) {
    logistic_objective(model, x, y, options.lambda, &grad);
    model.coefficients -= options.learning_rate * grad.head(x.cols());
    model.intercept -= options.learning_rate * grad(x.cols());
  }
  return model;
}

// ------------------------------------------------------------------ k-means

namespace {

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const auto n = points.rows();
  require(k >= 1 && static_cast<Eigen::Index>(k) <= n, ErrorKind::ConfigError,
          "kmeans: k must lie in [1, n] (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  const auto kk = static_cast<Eigen::Index>(k);
  Rng rng(seed);
  KMeansResult result;
  result.centroids.resize(kk, points.cols());

  // k-means++ seeding
  result.centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n))));
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 1; c < kk; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], squared_distance(points, i, result.centroids, c - 1));
    }
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    const auto pick = total > 0.0 ? rng.categorical(nearest) : rng.below(static_cast<std::size_t>(n));
    result.centroids.row(c) = points.row(static_cast<Eigen::Index>(pick));
  }

  result.labels.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, result.centroids, 0);
      for (Eigen::Index c = 1; c < kk; ++c) {
        const double d = squared_distance(points, i, result.centroids, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      auto& label = result.labels[static_cast<std::size_t>(i)];
      changed = changed || label != best;
      label = best;
      inertia += best_d;
    }
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(kk, points.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        result.centroids.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its own centroid.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = squared_distance(points, i, result.centroids, result.labels[static_cast<std::size_t>(i)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      result.centroids.row(c) = points.row(far);
    }
  }
  return result;
}

// ------------------------------------------------------------------ experiments

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::Regression;
  if (name == "binary" || name == "binary-classification") return Task::BinaryClassification;
  if (name == "multiclass") return Task::MultiClass;
  if (name == "unsupervised") return Task::Unsupervised;
  fail(ErrorKind::ConfigError, "unknown task '" + name + "' (expected regression|binary|multiclass|unsupervised)");
}

std::string to_string(Task task) {
  switch (task) {
    case Task::Regression: return "regression";
    case Task::BinaryClassification: return "binary";
    case Task::MultiClass: return "multiclass";
    case Task::Unsupervised: return "unsupervised";
  }
  return "unknown";
}

Dataset load_source(const DataSource& source, std::uint64_t seed) {
  if (source.synthetic) return generate_synthetic(source.context, source.n, seed, source.coefficients);
  CsvOptions options;
  if (source.schema) options.schema = Schema::read_sidecar(*source.schema);
  options.categorical = source.categorical;
  if (!source.target.empty()) options.target = source.target;
  return read_csv(source.csv, options);
}

void validate(const ExperimentConfig& config) {
  require(config.runs >= 1, ErrorKind::ConfigError, "runs must be at least 1");
  require(!config.epochs.empty(), ErrorKind::ConfigError, "epochs list is empty");
  for (auto e : config.epochs) require(e >= 1, ErrorKind::ConfigError, "epochs must be at least 1");
  require(!config.losses.empty(), ErrorKind::ConfigError, "loss list is empty");
  std::set<std::string> names;
  for (const auto& l : config.losses) {
    require(names.insert(to_string(l)).second, ErrorKind::ConfigError, "duplicate loss " + to_string(l));
  }
  require(config.test_fraction > 0.0 && config.test_fraction < 1.0, ErrorKind::FractionOutOfRange,
          "test_fraction must lie in (0, 1)");
  require(config.batch_size >= 1 && config.dim_z >= 1, ErrorKind::ConfigError, "batch_size and dim_z must be >= 1");
  require(config.learning_rate > 0.0 && config.vae.learning_rate > 0.0, ErrorKind::ConfigError,
          "learning rates must be positive");
  require(config.clustering_k >= 2, ErrorKind::ConfigError, "clustering_k must be at least 2");
  require(config.jobs >= 1, ErrorKind::ConfigError, "jobs must be at least 1");
  if (config.data.synthetic) require(config.data.n >= 2, ErrorKind::ConfigError, "synthetic n must be at least 2");
  else require(!config.data.csv.empty(), ErrorKind::ConfigError, "csv data source needs a path");
}

RunSeeds run_seeds(std::uint64_t seed, std::size_t run) {
  const auto base = derive_seed(seed, run);
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

std::uint64_t data_seed(std::uint64_t seed) { return derive_seed(seed, 0xDA7A5EEDULL); }

namespace {

std::vector<int> class_labels(std::span<const double> y, Task task) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (task == Task::BinaryClassification) {
      out[i] = y[i] >= 0.5 ? 1 : 0;
    } else {
      out[i] = static_cast<int>(std::lround(y[i]));
    }
  }
  return out;
}

void check_class_target(std::span<const double> y, Task task) {
  for (double v : y) {
    require(v == std::round(v), ErrorKind::SchemaMismatch, "classification target holds a non-integer value");
    if (task == Task::BinaryClassification) {
      require(v == 0.0 || v == 1.0, ErrorKind::SchemaMismatch, "binary target must be 0 or 1");
    }
  }
}

}  // namespace

void add_downstream_metrics(ExperimentReport& report, std::size_t run, std::size_t epochs, const std::string& loss,
                            const std::string& prefix, const Matrix& train_x, std::span<const double> train_y,
                            const Matrix& test_x, std::span<const double> test_y, const ExperimentConfig& config) {
  auto put = [&](const std::string& metric, double value) { report.add(run, epochs, loss, prefix + "_" + metric, value); };
  switch (config.task) {
    case Task::Unsupervised:
      return;
    case Task::Regression: {
      const auto model = ridge_fit(train_x, train_y, config.ridge_lambda);
      const Vector pred = model.predict(test_x);
      const auto err = prediction_error(test_y, std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
      put("mse", err.mse);
      put("mae", err.mae);
      put("rmse", err.rmse);
      return;
    }
    case Task::BinaryClassification: {
      const auto ytr = class_labels(train_y, config.task);
      const auto yte = class_labels(test_y, config.task);
      const auto model = logistic_fit(train_x, ytr, config.logistic);
      const Vector prob = sigmoid(model.predict(test_x));
      std::vector<int> pred(static_cast<std::size_t>(prob.size()));
      for (Eigen::Index i = 0; i < prob.size(); ++i) pred[static_cast<std::size_t>(i)] = prob(i) >= 0.5;
      const auto scores = classification_scores(yte, pred);
      put("f1", scores.f1);
      put("balanced_accuracy", scores.balanced_accuracy);
      put("accuracy", scores.accuracy);
      put("auc", binary_auc(yte, std::span<const double>(prob.data(), static_cast<std::size_t>(prob.size()))));
      return;
    }
    case Task::MultiClass: {
      const auto ytr = class_labels(train_y, config.task);
      const auto yte = class_labels(test_y, config.task);
      std::set<int> classes(ytr.begin(), ytr.end());
      classes.insert(yte.begin(), yte.end());
      const std::vector<int> ids(classes.begin(), classes.end());
      Matrix scores(test_x.rows(), static_cast<Eigen::Index>(ids.size()));
      for (std::size_t c = 0; c < ids.size(); ++c) {
        std::vector<int> binary(ytr.size());
        for (std::size_t i = 0; i < ytr.size(); ++i) binary[i] = ytr[i] == ids[c];
        scores.col(static_cast<Eigen::Index>(c)) = logistic_fit(train_x, binary, config.logistic).predict(test_x);
      }
      std::size_t correct = 0;
      for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        scores.row(i).maxCoeff(&best);
        correct += ids[static_cast<std::size_t>(best)] == yte[static_cast<std::size_t>(i)];
      }
      put("accuracy", static_cast<double>(correct) / static_cast<double>(scores.rows()));
      return;
    }
  }
}

namespace {

void write_curve(const ExperimentConfig& config, std::size_t run, std::size_t epochs, const LossSpec& loss,
                 const LearningCurve& curve) {
  if (!config.curves_dir) return;
  const auto dir = *config.curves_dir / ("e" + std::to_string(epochs));
  std::filesystem::create_directories(dir);
  curve.write_csv(dir / ("run_" + std::to_string(run) + "_" + file_tag(loss) + ".csv"));
}

void add_silhouette(ExperimentReport& report, std::size_t run, std::size_t epochs, const std::string& loss,
                    const Matrix& points, const ExperimentConfig& config, std::uint64_t seed) {
  const auto km = kmeans(points, config.clustering_k, seed);
  double score = 0.0;
  std::set<int> used(km.labels.begin(), km.labels.end());
  if (used.size() >= 2) score = silhouette(points, km.labels);
  report.add(run, epochs, loss, "silhouette", score);
}

std::span<const double> target_of(const Dataset& d) { return d.target(); }

ExperimentReport autoencoder_run(const ExperimentConfig& config, const Dataset& data, std::size_t run) {
  ExperimentReport report;
  const auto seeds = run_seeds(config.seed, run);
  const auto [train, test] = split(data, config.test_fraction, seeds.split);
  const auto enc = std::make_shared<const EncoderState>(fit_encoder(train.without_target()));
  const Dataset train_x = train.without_target();
  const Dataset test_x = test.without_target();
  const auto train_enc = encode(train_x, enc);
  const auto test_enc = encode(test_x, enc);
  const bool supervised = config.task != Task::Unsupervised;

  if (supervised) {
    add_downstream_metrics(report, run, 0, kBaselineLoss, "recon", train_enc.values, target_of(train), test_enc.values,
                           target_of(test), config);
  } else {
    add_silhouette(report, run, 0, kBaselineLoss, train_enc.values, config, seeds.clustering);
  }

  for (auto epochs : config.epochs) {
    for (const auto& loss : config.losses) {
      const auto name = to_string(loss);
      AutoencoderConfig ae{config.dim_z, epochs, config.batch_size, config.learning_rate, loss, seeds.model};
      const auto model = train_autoencoder(train_enc, ae);
      write_curve(config, run, epochs, loss, model.curve);

      const Dataset test_rec = reconstruct(model, test_x);
      report.add(run, epochs, name, "msem", msem(test_x, test_rec, *enc));
      report.add(run, epochs, name, "mc", mc_distance(test_x, test_rec));

      const Matrix train_latent = latent(model, train_x);
      if (supervised) {
        const Dataset train_rec = reconstruct(model, train_x);
        add_downstream_metrics(report, run, epochs, name, "recon", encode(train_rec, enc).values, target_of(train),
                               test_enc.values, target_of(test), config);
        add_downstream_metrics(report, run, epochs, name, "latent", train_latent, target_of(train),
                               latent(model, test_x), target_of(test), config);
      } else {
        add_silhouette(report, run, epochs, name, train_latent, config, seeds.clustering);
      }
    }
  }
  return report;
}

ExperimentReport vae_run(const ExperimentConfig& config, const Dataset& data, std::size_t run) {
  ExperimentReport report;
  const auto seeds = run_seeds(config.seed, run);
  const auto [train, test] = split(data, config.test_fraction, seeds.split);
  const auto enc = std::make_shared<const EncoderState>(fit_encoder(train.without_target()));
  const Dataset test_x = test.without_target();
  const Matrix test_enc = encode(test_x, enc).values;

  add_downstream_metrics(report, run, 0, kBaselineLoss, "gen", encode(train.without_target(), enc).values,
                         target_of(train), test_enc, target_of(test), config);

  for (auto epochs : config.epochs) {
    for (const auto& loss : config.losses) {
      const auto name = to_string(loss);
      VaeConfig vc = config.vae;
      vc.epochs = epochs;
      vc.loss = loss;
      vc.seed = seeds.model;
      const auto model = train_vae(train, vc);
      const Dataset test_rec = vae_reconstruct(model, test_x);
      report.add(run, epochs, name, "msem", msem(test_x, test_rec, *enc));
      report.add(run, epochs, name, "mc", mc_distance(test_x, test_rec));
      const Dataset generated = vae_generate(model, train.rows(), seeds.generation);
      add_downstream_metrics(report, run, epochs, name, "gen", encode(generated.without_target(), enc).values,
                             target_of(generated), test_enc, target_of(test), config);
    }
  }
  return report;
}

template <typename RunFn>
ExperimentReport run_all(const ExperimentConfig& config, RunFn run_fn) {
  validate(config);
  const Dataset data = load_source(config.data, data_seed(config.seed));
  if (config.task != Task::Unsupervised) {
    require(data.has_target(), ErrorKind::SchemaMismatch, "supervised task needs a target column");
    if (config.task != Task::Regression) check_class_target(data.target(), config.task);
  }

  ExperimentReport report;
  report.context = config.data.synthetic ? to_string(config.data.context) : config.data.csv.stem().string();
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::size_t failed_run = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const auto run = next.fetch_add(1);
      if (run >= config.runs) return;
      try {
        auto partial = run_fn(config, data, run);
        std::lock_guard lock(mutex);
        report.merge(partial);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (run < failed_run) {
          failed_run = run;
          failure = std::current_exception();
        }
      }
    }
  };

  const auto jobs = std::min(config.jobs, config.runs);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  if (failure) {
    const auto where = "run " + std::to_string(failed_run) + " (seed " + std::to_string(config.seed) +
                       ", split seed " + std::to_string(run_seeds(config.seed, failed_run).split) + ")";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.message());
    }
  }
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) { return run_all(config, autoencoder_run); }

ExperimentReport vae_experiment(const ExperimentConfig& config) {
  require(config.task == Task::Regression || config.task == Task::BinaryClassification, ErrorKind::ConfigError,
          "the VAE experiment supports regression and binary tasks");
  return run_all(config, vae_run);
}

}  // namespace balmse
