#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "balmse/errors.hpp"
#include "balmse/eval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace balmse;

namespace {

// Gaussian elimination with partial pivoting on a small dense system.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.data.n = 1000;
  cfg.runs = 2;
  cfg.epochs = {3};
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-3;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("ridge recovers exact linear data and shrinks under large penalties") {
  Rng rng(1);
  const Matrix x = testing::random_matrix(rng, 30, 3);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) y[i] = 2 * x(i, 0) - x(i, 1) + 0.5 * x(i, 2) + 3;
  const auto exact = ridge_fit(x, y, 0.0);
  const Vector pred = exact.predict(x);
  for (int i = 0; i < 30; ++i) CHECK(std::abs(pred(i) - y[i]) < 1e-8);

  const auto shrunk = ridge_fit(x, y, 1e12);
  CHECK(shrunk.coefficients.cwiseAbs().maxCoeff() < 1e-8);
  double mean = 0;
  for (double v : y) mean += v / 30;
  CHECK(shrunk.intercept == doctest::Approx(mean));
}

TEST_CASE("ridge matches the penalized normal equations") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_matrix(rng, 5, 3);
    std::vector<double> y(5);
    for (auto& v : y) v = rng.normal();
    const double lambda = rng.uniform(0.01, 2.0);
    // Unknowns (b1, b2, b3, c); intercept unpenalized.
    std::vector<std::vector<double>> a(4, std::vector<double>(4, 0.0));
    std::vector<double> rhs(4, 0.0);
    for (int i = 0; i < 5; ++i) {
      const double row[4] = {x(i, 0), x(i, 1), x(i, 2), 1.0};
      for (int r = 0; r < 4; ++r) {
        rhs[r] += row[r] * y[i];
        for (int c = 0; c < 4; ++c) a[r][c] += row[r] * row[c];
      }
    }
    for (int r = 0; r < 3; ++r) a[r][r] += lambda;
    const auto expected = solve(a, rhs);
    const auto model = ridge_fit(x, y, lambda);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(model.coefficients(k) - expected[k]) < 1e-10);
    CHECK(std::abs(model.intercept - expected[3]) < 1e-10);
  }
}

TEST_CASE("logistic regression examples") {
  Matrix x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  const auto model = logistic_fit(x, y);
  const Vector p = sigmoid(model.predict(x));
  for (int i = 0; i < 8; ++i) CHECK((p(i) >= 0.5) == (y[i] == 1));

  const Matrix none(10, 0);
  const std::vector<int> z{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  LogisticOptions opts;
  opts.steps = 2000;
  const auto base = logistic_fit(none, z, opts);
  CHECK(sigmoid(base.predict(none))(0) == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("logistic objective gradient matches finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = testing::random_matrix(rng, 12, 3, -2, 2);
    std::vector<int> y(12);
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    LinearModel m{testing::random_matrix(rng, 3, 1), rng.normal()};
    Vector grad;
    logistic_objective(m, x, y, 0.1, &grad);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      LinearModel up = m, down = m;
      if (k < 3) {
        up.coefficients(k) += h;
        down.coefficients(k) -= h;
      } else {
        up.intercept += h;
        down.intercept -= h;
      }
      const double fd = (logistic_objective(up, x, y, 0.1) - logistic_objective(down, x, y, 0.1)) / (2 * h);
      CHECK(testing::rel_error(fd, grad(k)) < 1e-6);
    }
  }
}

TEST_CASE("k-means examples") {
  Matrix pts(4, 2);
  pts << 0, 0, 5, 5, 10, 0, 0, 10;
  const auto each = kmeans(pts, 4, 1);
  CHECK(std::set<int>(each.labels.begin(), each.labels.end()).size() == 4);
  CHECK(each.inertia() == 0.0);

  Rng rng(4);
  Matrix blobs(60, 2);
  for (int i = 0; i < 60; ++i) {
    blobs(i, 0) = (i < 30 ? 0 : 50) + rng.normal();
    blobs(i, 1) = rng.normal();
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = kmeans(blobs, 2, seed);
    for (int i = 1; i < 60; ++i) CHECK((r.labels[i] == r.labels[0]) == (i < 30));
  }

  Matrix cloud = testing::random_matrix(rng, 200, 3);
  const auto r = kmeans(cloud, 5, 7);
  for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
    CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-12);
  }
  CHECK_THROWS_AS(kmeans(cloud, 201, 1), Error);
}

TEST_CASE("experiment report is complete and independent of the job count") {
  auto cfg = tiny_config();
  const auto report = run_experiment(cfg);
  const std::vector<std::string> per_loss{"msem", "mc", "recon_mse", "recon_mae", "recon_rmse",
                                          "latent_mse", "latent_mae", "latent_rmse"};
  for (std::size_t run = 0; run < 2; ++run) {
    for (const char* loss : {"standard", "balanced"}) {
      for (const auto& metric : per_loss) CHECK(report.contains({run, 3, loss, metric}));
    }
    for (const char* metric : {"recon_mse", "recon_mae", "recon_rmse"}) {
      CHECK(report.contains({run, 0, kBaselineLoss, metric}));
    }
  }
  CHECK(report.size() == 2 * (2 * per_loss.size() + 3));
  CHECK(report.context == "imbalanced");
  CHECK(report.at({0, 3, "standard", "msem"}) != report.at({1, 3, "standard", "msem"}));

  cfg.jobs = 2;
  const auto parallel = run_experiment(cfg);
  CHECK(parallel.rows() == report.rows());
}

TEST_CASE("classification and unsupervised tasks report their metrics") {
  auto cfg = tiny_config();
  cfg.runs = 1;
  cfg.task = Task::Unsupervised;
  const auto u = run_experiment(cfg);
  CHECK(u.contains({0, 0, kBaselineLoss, "silhouette"}));
  CHECK(u.contains({0, 3, "balanced", "silhouette"}));
  CHECK_FALSE(u.contains({0, 3, "balanced", "recon_mse"}));

  // Binary target from a CSV: y > median.
  const auto dir = testing::scratch_dir("eval_binary");
  auto data = generate_synthetic(Context::Imbalanced, 300, 9);
  auto y = data.target();
  auto sorted = y;
  std::sort(sorted.begin(), sorted.end());
  for (auto& v : y) v = v > sorted[150] ? 1.0 : 0.0;
  write_csv(data.with_target(y), dir / "b.csv");
  cfg.data.synthetic = false;
  cfg.data.csv = dir / "b.csv";
  cfg.task = Task::BinaryClassification;
  const auto b = run_experiment(cfg);
  for (const char* m : {"recon_f1", "recon_balanced_accuracy", "recon_accuracy", "recon_auc", "latent_auc"}) {
    CHECK(b.contains({0, 3, "standard", m}));
  }
  CHECK(b.at({0, 0, kBaselineLoss, "recon_auc"}) > 0.7);
  CHECK(b.context == "b");

  cfg.task = Task::MultiClass;
  std::vector<double> three(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) three[i] = static_cast<double>(i % 3);
  write_csv(data.with_target(three), dir / "b.csv");
  const auto m = run_experiment(cfg);
  CHECK(m.contains({0, 3, "balanced", "latent_accuracy"}));
}

TEST_CASE("vae experiment reports generation metrics per loss") {
  auto cfg = tiny_config();
  cfg.runs = 1;
  cfg.vae.batch_size = 64;
  const auto r = vae_experiment(cfg);
  for (const char* loss : {"standard", "balanced"}) {
    for (const char* m : {"msem", "mc", "gen_mse", "gen_mae", "gen_rmse"}) CHECK(r.contains({0, 3, loss, m}));
  }
  CHECK(r.contains({0, 0, kBaselineLoss, "gen_mse"}));
}

TEST_CASE("a failing run names its seed") {
  const auto dir = testing::scratch_dir("eval_fail");
  // One row holds the only 'rare' category, so some split leaves it out of train.
  std::ofstream out(dir / "f.csv");
  out << "a,b,y\n";
  for (int i = 0; i < 40; ++i) out << i << ',' << (i == 0 ? "rare" : (i % 2 ? "p" : "q")) << ',' << i * 0.5 << '\n';
  out.close();
  auto cfg = tiny_config();
  cfg.data.synthetic = false;
  cfg.data.csv = dir / "f.csv";
  cfg.runs = 6;
  cfg.dim_z = 1;
  try {
    run_experiment(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCategory);
    CHECK(std::string(e.what()).find("seed 5") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  auto cfg = tiny_config();
  cfg.runs = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = tiny_config();
  cfg.losses = {LossSpec::standard(), LossSpec::standard()};
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = tiny_config();
  cfg.test_fraction = 1.5;
  CHECK_THROWS_AS(validate(cfg), Error);
  CHECK(run_seeds(1, 2).split == run_seeds(1, 2).split);
  CHECK(run_seeds(1, 2).split != run_seeds(1, 3).split);
  CHECK(run_seeds(1, 2).model != run_seeds(1, 2).split);
}
