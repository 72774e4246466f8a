#include <fstream>
#include <sstream>

#include "balmse/cli.hpp"
#include "balmse/config.hpp"
#include "balmse/errors.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace balmse;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "balmse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kTinyExperiment =
    "[data]\nn = 1000\n[model]\nbatch_size = 64\nlearning_rate = 0.001\nvae_batch_size = 64\n"
    "[experiment]\nruns = 2\nepochs = 2,4\nlosses = standard,balanced,blended:0.5\n"
    "[run]\nseed = 3\nwrite_curves = true\n";

}  // namespace

TEST_CASE("generate writes n rows, a schema sidecar and identical bytes on rerun") {
  const auto dir = testing::scratch_dir("cli_generate");
  const auto a = run({"generate", "--context", "balanced", "--n", "120", "--seed", "4", "--out", (dir / "a.csv").string()});
  CHECK(a.code == 0);
  run({"generate", "--context", "balanced", "--n", "120", "--seed", "4", "--out", (dir / "b.csv").string()});
  const auto text = slurp(dir / "a.csv");
  CHECK(line_count(text) == 121);
  CHECK(text == slurp(dir / "b.csv"));
  const auto schema = slurp(dir / "a.csv.schema");
  CHECK(line_count(schema) == 9);
  CHECK(schema.find("y,numeric") != std::string::npos);
  CHECK(run({"generate", "--context", "sideways", "--out", (dir / "c.csv").string()}).code == kExitConfig);
}

TEST_CASE("config dump lists every default and reads back") {
  const auto r = run({"config", "dump"});
  CHECK(r.code == 0);
  for (const char* key : {"[data]", "[model]", "[experiment]", "[run]", "context = imbalanced", "runs = 20",
                          "epochs = 1000,2000,3000", "losses = standard,balanced", "batch_size = 128",
                          "learning_rate = 1e-04", "test_fraction = 0.4", "clustering_k = 4"}) {
    CHECK(r.out.find(key) != std::string::npos);
  }
  CHECK(dump_config(parse_config(r.out)) == r.out);

  const auto json = parse_config(R"({"experiment": {"runs": 3, "epochs": [10, 20], "losses": ["ce", "blended:0.3"]},
                                     "run": {"seed": 9}})");
  CHECK(json.experiment.runs == 3);
  CHECK(json.experiment.epochs == std::vector<std::size_t>{10, 20});
  CHECK(json.experiment.losses[1] == LossSpec::blended(0.3));
  CHECK(json.experiment.seed == 9);
  const auto ini = parse_config("[experiment]\nruns = 3\nepochs = 10, 20\nlosses = ce, blended:0.3\n[run]\nseed = 9\n");
  CHECK(dump_config(ini) == dump_config(json));
}

TEST_CASE("configuration mistakes exit with code 2") {
  const auto dir = testing::scratch_dir("cli_config_errors");
  write(dir / "unknown.ini", "[experiment]\nrunz = 3\n");
  const auto r = run({"experiment", "--config", (dir / "unknown.ini").string(), "--dry-run"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("runz") != std::string::npos);
  write(dir / "ok.ini", "[experiment]\nruns = 1\n");
  CHECK(run({"experiment", "--config", (dir / "ok.ini").string(), "--loss", "huber", "--dry-run"}).code == kExitConfig);
  CHECK(run({"experiment", "--config", (dir / "missing.ini").string()}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
  write(dir / "section.ini", "[extra]\nkey = 1\n");
  CHECK(run({"config", "dump", "--config", (dir / "section.ini").string()}).code == kExitConfig);
}

TEST_CASE("dry run validates without writing") {
  const auto dir = testing::scratch_dir("cli_dry");
  write(dir / "c.ini", kTinyExperiment);
  const auto r = run({"experiment", "--config", (dir / "c.ini").string(), "--out", (dir / "out").string(), "--dry-run"});
  CHECK(r.code == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("train writes a checkpoint and ten curve checkpoints per feature") {
  const auto dir = testing::scratch_dir("cli_train");
  write(dir / "c.ini", "[data]\nn = 1000\n[model]\nbatch_size = 64\n");
  const auto r = run({"train", "--config", (dir / "c.ini").string(), "--out", (dir / "out").string(), "--epochs", "5",
                      "--loss", "balanced"});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(dir / "out" / "model.ckpt"));
  const auto curve = slurp(dir / "out" / "curves" / "run_0_balanced.csv");
  CHECK(line_count(curve) == 1 + 10 * 33);
  std::istringstream lines(curve);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "checkpoint,feature,error");
  std::map<std::string, int> per_feature;
  while (std::getline(lines, line)) {
    const auto a = line.find(',');
    const auto b = line.rfind(',');
    ++per_feature[line.substr(a + 1, b - a - 1)];
  }
  CHECK(per_feature.size() == 33);
  for (const auto& [name, count] : per_feature) CHECK(count == 10);

  write(dir / "vae.ini", "[data]\nn = 1000\n[model]\nkind = vae\n");
  CHECK(run({"train", "--config", (dir / "vae.ini").string(), "--out", (dir / "vout").string(), "--epochs", "3"}).code == 0);
  CHECK(line_count(slurp(dir / "vout" / "loss_history.csv")) == 11);
}

TEST_CASE("data errors exit with code 3 and say what went wrong") {
  const auto dir = testing::scratch_dir("cli_data_errors");
  std::string csv = "a,b,y\n";
  for (int i = 0; i < 10; ++i) csv += std::to_string(i) + ",p," + std::to_string(i) + "\n";
  write(dir / "d.csv", csv);
  write(dir / "d.csv.schema", "a,numeric\nb,categorical,p|never\ny,numeric\n");
  write(dir / "c.ini", "[data]\nsource = csv\ncsv = " + (dir / "d.csv").string() + "\nschema = " +
                           (dir / "d.csv.schema").string() + "\n");
  const auto r = run({"train", "--config", (dir / "c.ini").string(), "--out", (dir / "out").string(), "--epochs", "2"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("never") != std::string::npos);
  const auto missing = run({"report", (dir / "nope.csv").string()});
  CHECK(missing.code == kExitData);
  CHECK(missing.err.find("not found") != std::string::npos);
}

TEST_CASE("experiment writes report, summary and curves; report summarizes them") {
  const auto dir = testing::scratch_dir("cli_experiment");
  write(dir / "c.ini", kTinyExperiment);
  const auto r = run({"experiment", "--config", (dir / "c.ini").string(), "--out", (dir / "a").string()});
  REQUIRE(r.code == 0);
  CHECK(run({"experiment", "--config", (dir / "c.ini").string(), "--out", (dir / "b").string(), "--jobs", "2"}).code == 0);
  CHECK(slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv"));
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
  CHECK(std::filesystem::exists(dir / "a" / "curves" / "e4" / "run_1_blended_0.5.csv"));

  std::ifstream in(dir / "a" / "summary.json");
  const auto doc = nlohmann::json::parse(in);
  std::size_t cells = 0;
  for (const auto& [epochs, losses] : doc["cells"].items())
    for (const auto& [loss, metrics] : losses.items())
      for (const auto& [metric, agg] : metrics.items()) {
        CHECK(agg.contains("mean"));
        CHECK(agg.contains("std"));
        ++cells;
      }
  // 2 epochs x 3 losses x 8 metrics + 3 baseline metrics
  CHECK(cells == 2 * 3 * 8 + 3);

  const auto table = run({"report", (dir / "a" / "report.csv").string(), "--plot-data", (dir / "plot").string()});
  CHECK(table.code == 0);
  CHECK(line_count(table.out) == 1 + cells);
  const auto plot = slurp(dir / "plot" / "msem.csv");
  CHECK(line_count(plot) == 1 + 2 * 3);
  std::istringstream lines(plot);
  std::string line;
  std::getline(lines, line);
  int last = 0;
  while (std::getline(lines, line)) {
    const int epochs = std::stoi(line.substr(0, line.find(',')));
    CHECK(epochs >= last);
    last = epochs;
  }
}
