#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "balmse/models.hpp"
#include "balmse/report.hpp"
#include "balmse/tabular.hpp"

namespace balmse {

// ------------------------------------------------------------------ proxy predictors

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;

  Vector predict(const Matrix& x) const;
};

/// Closed-form ridge with an unpenalized intercept:
/// beta = (Xc'Xc + lambda I)^+ Xc'yc on centered data.
LinearModel ridge_fit(const Matrix& x, std::span<const double> y, double lambda);

struct LogisticOptions {
  std::size_t steps = 500;
  double learning_rate = 0.5;
  double lambda = 1e-4;
};

/// Full-batch gradient descent on mean log-loss + lambda/2 |w|^2
/// (intercept unpenalized), from zero.
LinearModel logistic_fit(const Matrix& x, std::span<const int> y, const LogisticOptions& options = {});

/// Mean regularized log-loss and its gradient (coefficients, then intercept);
/// exposed for gradient checks.
double logistic_objective(const LinearModel& model, const Matrix& x, std::span<const int> y, double lambda,
                          Vector* grad = nullptr);

Vector sigmoid(const Vector& z);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;                     // k x d
  std::vector<double> inertia_history;  // after each assignment step
  std::size_t iterations = 0;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

/// k-means++ seeding then Lloyd iterations; an empty cluster is reseeded at
/// the point farthest from its current centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

// ------------------------------------------------------------------ experiments

enum class Task { Regression, BinaryClassification, MultiClass, Unsupervised };

Task parse_task(const std::string& name);
std::string to_string(Task task);

struct DataSource {
  bool synthetic = true;
  Context context = Context::Imbalanced;
  std::size_t n = 2000;
  ContextCoefficients coefficients = kUnitCoefficients;
  std::filesystem::path csv;
  std::optional<std::filesystem::path> schema;
  std::string target = "y";
  std::vector<std::string> categorical;
};

/// Synthetic data (seeded by `seed`) or the CSV file named by the source.
Dataset load_source(const DataSource& source, std::uint64_t seed);

struct ExperimentConfig {
  DataSource data;
  std::size_t runs = 20;
  double test_fraction = 0.4;
  std::vector<std::size_t> epochs{1000, 2000, 3000};
  std::vector<LossSpec> losses{LossSpec::standard(), LossSpec::balanced()};
  std::size_t dim_z = 10;
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  VaeConfig vae;  // epochs and loss are taken from the lists above
  std::uint64_t seed = 0;
  std::size_t clustering_k = 4;
  Task task = Task::Regression;
  double ridge_lambda = 1e-3;
  LogisticOptions logistic;
  std::size_t jobs = 1;
  /// When set, learning curves go to <dir>/e<epochs>/run_<id>_<loss>.csv.
  std::optional<std::filesystem::path> curves_dir;
};

void validate(const ExperimentConfig& config);

/// Seeds used by run `run`: split, model, clustering, generation.
struct RunSeeds {
  std::uint64_t split;
  std::uint64_t model;
  std::uint64_t clustering;
  std::uint64_t generation;
};
RunSeeds run_seeds(std::uint64_t seed, std::size_t run);
/// Seed of the synthetic sample shared by all runs.
std::uint64_t data_seed(std::uint64_t seed);

inline const std::string kBaselineLoss = "baseline";

/// Downstream scores of a proxy fitted on (train_x, train_y) and evaluated
/// on (test_x, test_y), added under `<prefix>_<metric>`.
void add_downstream_metrics(ExperimentReport& report, std::size_t run, std::size_t epochs, const std::string& loss,
                            const std::string& prefix, const Matrix& train_x, std::span<const double> train_y,
                            const Matrix& test_x, std::span<const double> test_y, const ExperimentConfig& config);

/// Autoencoder protocol: per run split, fit the encoder on train, train one
/// autoencoder per (epochs, loss), score reconstruction and downstream
/// prediction on the untouched test split.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// VAE protocol: per run train one VAE per (epochs, loss), generate as many
/// rows as the train split, fit proxies on the generated data and score
/// them on the real test split.
ExperimentReport vae_experiment(const ExperimentConfig& config);

}  // namespace balmse
