#include <cmath>
#include <fstream>

#include "balmse/errors.hpp"
#include "balmse/report.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace balmse;

TEST_CASE("report cells are unique and order-insensitive") {
  ExperimentReport a, b;
  a.add(0, 10, "standard", "msem", 0.5);
  a.add(1, 10, "standard", "msem", 0.25);
  b.add(1, 10, "standard", "msem", 0.25);
  b.add(0, 10, "standard", "msem", 0.5);
  CHECK(a.rows() == b.rows());
  CHECK_THROWS_AS(a.add(0, 10, "standard", "msem", 1.0), Error);
  CHECK_THROWS_AS(a.merge(b), Error);
}

TEST_CASE("aggregates agree with a direct recomputation") {
  Rng rng(1);
  ExperimentReport r;
  std::vector<double> v;
  for (std::size_t run = 0; run < 7; ++run) {
    v.push_back(rng.normal());
    r.add(run, 5, "balanced", "mc", v.back());
  }
  const auto agg = r.aggregate().at({5, "balanced", "mc"});
  double mean = 0;
  for (double x : v) mean += x;
  mean /= 7;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  CHECK(agg.count == 7);
  CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(agg.std == doctest::Approx(std::sqrt(ss / 6)).epsilon(1e-15));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(agg.median == sorted[3]);
  CHECK(agg.min == sorted.front());
  CHECK(agg.max == sorted.back());
  CHECK(summarize({1.0, 2.0, 3.0, 10.0}).median == 2.5);
}

TEST_CASE("report files round trip") {
  const auto dir = testing::scratch_dir("report_files");
  ExperimentReport r;
  r.context = "imbalanced";
  r.add(0, 0, "baseline", "recon_mse", 1.0 / 3.0);
  r.add(0, 100, "blended:0.5", "msem", 0.1);
  r.add(1, 100, "blended:0.5", "msem", 0.3);
  r.write_csv(dir / "report.csv");
  const auto back = ExperimentReport::read_csv(dir / "report.csv");
  CHECK(back.rows() == r.rows());
  CHECK(back.context == "imbalanced");

  r.write_summary_json(dir / "summary.json");
  std::ifstream in(dir / "summary.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["context"] == "imbalanced");
  CHECK(doc["cells"]["100"]["blended:0.5"]["msem"]["mean"].get<double>() == doctest::Approx(0.2));
  CHECK(doc["cells"]["100"]["blended:0.5"]["msem"]["n"] == 2);
  CHECK(doc["cells"]["0"]["baseline"]["recon_mse"]["std"].get<double>() == 0.0);
  CHECK_THROWS_AS(ExperimentReport::read_csv(dir / "missing.csv"), Error);
}
