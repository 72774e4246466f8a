#include <cmath>

#include "balmse/errors.hpp"
#include "balmse/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace balmse;

namespace {

Dataset numeric_pair(std::vector<double> x, std::vector<double> y) {
  Schema schema({Column{"x", ColumnKind::Numeric, {}}, Column{"y", ColumnKind::Numeric, {}}});
  return Dataset(schema, {ColumnData(std::move(x)), ColumnData(std::move(y))});
}

}  // namespace

TEST_CASE("balanced accuracy examples") {
  const std::vector<int> t{1, 0, 1, 0, 0};
  CHECK(balanced_accuracy(t, t) == 1.0);
  CHECK(balanced_accuracy(t, std::vector<int>(5, 0)) == 0.5);
  std::vector<int> truth{1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  std::vector<int> pred{1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(balanced_accuracy(truth, pred) == 0.75);
  CHECK_THROWS_AS(balanced_accuracy(std::vector<int>{1, 1}, std::vector<int>{1, 0}), Error);
}

TEST_CASE("msem examples") {
  const auto d = testing::small_mixed({1, 2, 3, 4}, {0, 1, 0, 1}, {"x", "y"});
  CHECK(msem(d, d) == 0.0);

  const auto numeric = numeric_pair({0, 1, 2, 4}, {1, 2, 3, 5});
  const auto shifted = numeric_pair({1, 1, 2, 4}, {1, 2, 3, 3});
  // column x scaled by 1/4: one error of 1/4; column y scaled by 1/4: one error of 2/4
  const double expected = 0.5 * ((1.0 / 16) / 4 + (4.0 / 16) / 4);
  CHECK(msem(numeric, shifted) == doctest::Approx(expected).epsilon(1e-15));

  Schema one({Column{"q", ColumnKind::Categorical, {"a", "b"}}});
  const Dataset truth(one, {ColumnData(std::vector<int>{0, 0, 0, 1})});
  const Dataset majority(one, {ColumnData(std::vector<int>{0, 0, 0, 0})});
  CHECK(msem(truth, majority) == 0.5);
}

TEST_CASE("msem with an encoder clips test values into the training range") {
  const auto train = testing::small_mixed({2, 4, 6}, {0, 1, 0}, {"x", "y"});
  const auto enc = fit_encoder(train);
  const auto test = testing::small_mixed({8, 4}, {0, 1}, {"x", "y"});
  const auto recon = testing::small_mixed({6, 4}, {0, 1}, {"x", "y"});
  CHECK(msem(test, recon, enc) == 0.0);
}

TEST_CASE("prediction error examples") {
  const std::vector<double> y{0, 2};
  CHECK(prediction_error(y, y).mse == 0.0);
  const auto one = prediction_error(std::vector<double>{0, 0}, std::vector<double>{1, 1});
  CHECK(one.mse == 1.0);
  CHECK(one.mae == 1.0);
  CHECK(one.rmse == 1.0);
  const auto e = prediction_error(y, std::vector<double>{0, 0});
  CHECK(e.mse == 2.0);
  CHECK(e.mae == 1.0);
  CHECK(e.rmse == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("classification scores examples") {
  const std::vector<int> t{1, 0, 1, 0};
  const auto perfect = classification_scores(t, t);
  CHECK(perfect.f1 == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);
  CHECK(perfect.accuracy == 1.0);
  // TP=2, FP=1, FN=1, TN=6
  const std::vector<int> truth{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<int> pred{1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  CHECK(classification_scores(truth, pred).f1 == doctest::Approx(2.0 / 3.0));
  const auto none = classification_scores(t, std::vector<int>(4, 0));
  CHECK(none.f1 == 0.0);
  CHECK(none.f1_undefined);
}

TEST_CASE("auc by ranks") {
  CHECK(binary_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.8, 0.9}) == 1.0);
  CHECK(binary_auc(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}) == 0.5);
  // pairs (pos, neg): (0.4, 0.1) win, (0.4, 0.6) loss, (0.8, both) win -> 3/4
  CHECK(binary_auc(std::vector<int>{0, 1, 0, 1}, std::vector<double>{0.1, 0.4, 0.6, 0.8}) == 0.75);
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(spearman(x, x) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
  // 1 - 6 * sum d^2 / (n (n^2 - 1)) = 1 - 6 * 2 / 60
  CHECK(spearman(x, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 1, 1, 1}), Error);
}

TEST_CASE("cramers v examples") {
  const std::vector<int> a{0, 1, 2, 0, 1, 2};
  CHECK(cramers_v(a, a) == doctest::Approx(1.0));
  std::vector<int> u, v;
  for (int i = 0; i < 25; ++i) {
    u.insert(u.end(), {0, 0, 1, 1});
    v.insert(v.end(), {0, 1, 0, 1});
  }
  CHECK(cramers_v(u, v) == doctest::Approx(0.0));

  auto table = [](int d, int off) {
    std::pair<std::vector<int>, std::vector<int>> out;
    auto put = [&](int r, int c, int k) {
      for (int i = 0; i < k; ++i) {
        out.first.push_back(r);
        out.second.push_back(c);
      }
    };
    put(0, 0, d);
    put(0, 1, off);
    put(1, 0, off);
    put(1, 1, d);
    return out;
  };
  // chi^2 for [[9,1],[1,9]] is 20 * (81 - 1)^2 / (10^4) = 12.8, V = sqrt(12.8 / 20) = 0.8
  const auto [s1, s2] = table(10, 0);
  const auto [w1, w2] = table(9, 1);
  CHECK(cramers_v(s1, s2) == doctest::Approx(1.0));
  CHECK(cramers_v(w1, w2) == doctest::Approx(0.8));
}

TEST_CASE("eta squared examples") {
  CHECK(eta_squared(std::vector<double>{1, 1, 5, 5}, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(eta_squared(std::vector<double>{1, 3, 3, 1}, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.0));
  // SSB = 4 * (1)^2 = 4... group means 1.5 and 3.5, grand mean 2.5: SSB = 2*1 + 2*1 = 4, SST = 5
  CHECK(eta_squared(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(eta_squared(std::vector<double>{1, 2, 3}, std::vector<int>{0, 0, 0}), Error);
  CHECK_THROWS_AS(eta_squared(std::vector<double>{1, 2, 3}, std::vector<int>{0, 0, 2}, 3), Error);
}

TEST_CASE("mixed correlation assembles pairwise statistics") {
  const auto d = generate_synthetic(Context::Imbalanced, 400, 2).without_target();
  const auto mc = mixed_correlation(d);
  CHECK(mc.size() == 8);
  for (Eigen::Index i = 0; i < mc.size(); ++i) {
    CHECK(mc.values(i, i) == doctest::Approx(1.0));
    for (Eigen::Index j = 0; j < mc.size(); ++j) CHECK(mc.values(i, j) == mc.values(j, i));
  }
  CHECK(mc.kinds[0][1] == PairKind::Spearman);
  CHECK(mc.kinds[3][4] == PairKind::CramersV);
  CHECK(mc.kinds[0][4] == PairKind::EtaSquared);
  CHECK(mc.values(0, 1) == doctest::Approx(spearman(d.numeric(0), d.numeric(1))));
  CHECK(mc.values(3, 4) == doctest::Approx(cramers_v(d.codes(3), d.codes(4))));
  CHECK(mc.values(0, 4) == doctest::Approx(eta_squared(d.numeric(0), d.codes(4))));
}

TEST_CASE("mc distance examples") {
  const auto d1 = numeric_pair({1, 2, 3, 4, 5}, {2, 1, 3, 5, 4});  // rho 0.8
  const auto d2 = numeric_pair({1, 2, 3, 4, 5}, {3, 1, 5, 2, 4});  // rho 0.3
  CHECK(mc_distance(d1, d1) == 0.0);
  CHECK(mc_distance(d1, d2) == doctest::Approx(0.5));

  const auto d = generate_synthetic(Context::Imbalanced, 20000, 5).without_target();
  auto x1 = d.numeric(0);
  Rng rng(1);
  rng.shuffle(std::span<double>(x1));
  std::vector<ColumnData> columns;
  for (std::size_t j = 0; j < d.cols(); ++j) columns.push_back(j == 0 ? ColumnData(x1) : d.column_data(j));
  const Dataset permuted(d.schema(), columns);
  const auto a = mixed_correlation(d), b = mixed_correlation(permuted);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("silhouette examples") {
  Rng rng(3);
  Matrix blobs(40, 2);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) {
    const double cx = i < 20 ? 0.0 : 100.0;
    blobs(i, 0) = cx + rng.uniform(-0.1, 0.1);
    blobs(i, 1) = rng.uniform(-0.1, 0.1);
    labels[i] = i < 20 ? 0 : 1;
  }
  CHECK(silhouette(blobs, labels) > 0.9);

  CHECK(silhouette(Matrix::Zero(6, 2), std::vector<int>{0, 0, 0, 1, 1, 1}) == 0.0);

  Matrix blob(400, 2);
  std::vector<int> random(400);
  for (int i = 0; i < 400; ++i) {
    blob(i, 0) = rng.normal();
    blob(i, 1) = rng.normal();
    random[i] = static_cast<int>(rng.below(3));
  }
  CHECK(std::abs(silhouette(blob, random)) < 0.2);
  CHECK_THROWS_AS(silhouette(blob, std::vector<int>(400, 0)), Error);
}
