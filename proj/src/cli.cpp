#include "balmse/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "balmse/config.hpp"
#include "balmse/errors.hpp"
#include "balmse/eval.hpp"
#include "balmse/models.hpp"

namespace balmse {

namespace {

std::string format_value(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::vector<std::size_t> epochs;
  std::vector<std::string> losses;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* opt = cmd->add_option("--config", o.config, "Run configuration (sectioned key = value or JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", o.seed, "Top-level seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--epochs", o.epochs, "Training epochs (repeatable)")->delimiter(',');
  cmd->add_option("--loss", o.losses, "standard|balanced|blended:<alpha>|ce (repeatable)")->delimiter(',');
}

RunConfig resolve(const Overrides& o) {
  RunConfig config = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) config.experiment.seed = *o.seed;
  if (o.out) config.out = *o.out;
  if (o.jobs) config.experiment.jobs = *o.jobs;
  if (!o.epochs.empty()) config.experiment.epochs = o.epochs;
  if (!o.losses.empty()) {
    config.experiment.losses.clear();
    for (const auto& l : o.losses) config.experiment.losses.push_back(parse_loss(l));
  }
  return config;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

int cmd_generate(const std::string& context, std::size_t n, std::uint64_t seed, const std::filesystem::path& out,
                 std::ostream& log) {
  const auto data = generate_synthetic(parse_context(context), n, seed);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_csv(data, out);
  auto sidecar = out;
  sidecar += ".schema";
  csv_schema(data).write_sidecar(sidecar);
  log << "wrote " << data.rows() << " rows to " << out.string() << " (schema " << sidecar.string() << ")\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  const auto& e = config.experiment;
  validate(e);
  const auto epochs = e.epochs.front();
  const auto loss = e.losses.front();
  const Dataset data = load_source(e.data, data_seed(e.seed));
  std::filesystem::create_directories(config.out);

  if (config.model == ModelKind::Vae) {
    VaeConfig vc = e.vae;
    vc.epochs = epochs;
    vc.loss = loss;
    vc.seed = e.seed;
    const auto model = train_vae(data, vc);
    auto ckpt = open_out(config.out / "model.ckpt");
    save_vae(model, ckpt);
    auto history = open_out(config.out / "loss_history.csv");
    history << "checkpoint,loss\n";
    for (std::size_t i = 0; i < model.checkpoints.size(); ++i) {
      history << model.checkpoints[i] << ',' << format_value(model.loss_history[i]) << '\n';
    }
    log << "trained vae (" << to_string(loss) << ", " << epochs << " epochs) -> " << config.out.string() << '\n';
    return kExitOk;
  }

  const auto enc = std::make_shared<const EncoderState>(fit_encoder(data.without_target()));
  const auto encoded = encode(data.without_target(), enc);
  AutoencoderConfig ac{e.dim_z, epochs, e.batch_size, e.learning_rate, loss, e.seed};
  const auto model = train_autoencoder(encoded, ac);
  auto ckpt = open_out(config.out / "model.ckpt");
  save_autoencoder(model, ckpt);
  std::filesystem::create_directories(config.out / "curves");
  model.curve.write_csv(config.out / "curves" / ("run_0_" + file_tag(loss) + ".csv"));
  log << "trained autoencoder (" << to_string(loss) << ", " << epochs << " epochs) -> " << config.out.string()
      << '\n';
  return kExitOk;
}

int cmd_experiment(RunConfig config, bool dry_run, std::ostream& log) {
  auto& e = config.experiment;
  if (e.curves_dir) e.curves_dir = config.out / *e.curves_dir;
  validate(e);
  if (config.model == ModelKind::Vae) {
    require(e.task == Task::Regression || e.task == Task::BinaryClassification, ErrorKind::ConfigError,
            "the VAE experiment supports regression and binary tasks");
  }
  if (dry_run) {
    const auto data = load_source(e.data, data_seed(e.seed));
    log << "config ok: " << to_string(config.model) << ", " << e.runs << " runs, " << e.epochs.size()
        << " epoch settings, " << e.losses.size() << " losses, " << data.rows() << " rows\n";
    return kExitOk;
  }
  std::filesystem::create_directories(config.out);
  const auto report = config.model == ModelKind::Vae ? vae_experiment(e) : run_experiment(e);
  report.write_csv(config.out / "report.csv");
  report.write_summary_json(config.out / "summary.json");
  log << "wrote " << report.size() << " report rows to " << (config.out / "report.csv").string() << '\n';
  return kExitOk;
}

int cmd_report(const std::filesystem::path& path, const std::optional<std::filesystem::path>& plot_dir,
               std::ostream& out) {
  require(std::filesystem::exists(path), ErrorKind::IoError, "report file not found: " + path.string());
  const auto report = ExperimentReport::read_csv(path);
  const auto cells = report.aggregate();
  out << "epochs,loss,metric,n,mean,std,median\n";
  for (const auto& [key, agg] : cells) {
    const auto& [epochs, loss, metric] = key;
    out << epochs << ',' << loss << ',' << metric << ',' << agg.count << ',' << fixed(agg.mean) << ','
        << fixed(agg.std) << ',' << fixed(agg.median) << '\n';
  }
  if (plot_dir) {
    std::filesystem::create_directories(*plot_dir);
    std::map<std::string, std::vector<std::pair<CellKey, Aggregate>>> by_metric;
    for (const auto& [key, agg] : cells) by_metric[std::get<2>(key)].emplace_back(key, agg);
    for (const auto& [metric, rows] : by_metric) {
      auto file = open_out(*plot_dir / (metric + ".csv"));
      file << "epochs,loss,mean,std,median\n";
      // CellKey ordering already sorts by epochs, then loss.
      for (const auto& [key, agg] : rows) {
        file << std::get<0>(key) << ',' << std::get<1>(key) << ',' << format_value(agg.mean) << ','
             << format_value(agg.std) << ',' << format_value(agg.median) << '\n';
      }
    }
  }
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (classify(e.kind())) {
    case ErrorClass::Config: return kExitConfig;
    case ErrorClass::Data: return kExitData;
    case ErrorClass::Numerical: return kExitNumerical;
  }
  return kExitData;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Balanced MSE autoencoders for mixed tabular data", "balmse"};
  app.require_subcommand(1);

  std::string context = "imbalanced";
  std::size_t n = 2000;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic CSV and its schema sidecar");
  generate->add_option("--context", context, "imbalanced|balanced|majority");
  generate->add_option("--n", n, "Number of rows");
  generate->add_option("--seed", gen_seed, "Seed");
  generate->add_option("--out", gen_out, "Output CSV path")->required();

  Overrides train_opts;
  auto* train = app.add_subcommand("train", "Train one model, write checkpoint and curves");
  add_common(train, train_opts, true);

  Overrides exp_opts;
  bool dry_run = false;
  auto* experiment = app.add_subcommand("experiment", "Run the repeated comparison, write report.csv and summary.json");
  add_common(experiment, exp_opts, true);
  experiment->add_option("--jobs", exp_opts.jobs, "Concurrent runs");
  experiment->add_flag("--dry-run", dry_run, "Validate the configuration without training");

  std::string report_path;
  std::optional<std::string> plot_dir;
  auto* report = app.add_subcommand("report", "Print aggregates of a report.csv");
  report->add_option("report", report_path, "Path to report.csv")->required();
  report->add_option("--plot-data", plot_dir, "Directory for per-metric CSVs (metric vs epochs per loss)");

  Overrides dump_opts;
  auto* config = app.add_subcommand("config", "Configuration utilities");
  config->require_subcommand(1);
  auto* dump = config->add_subcommand("dump", "Print the full configuration with every default");
  add_common(dump, dump_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(context, n, gen_seed, gen_out, out);
    if (*train) return cmd_train(resolve(train_opts), out);
    if (*experiment) return cmd_experiment(resolve(exp_opts), dry_run, out);
    if (*report) {
      std::optional<std::filesystem::path> dir;
      if (plot_dir) dir = *plot_dir;
      return cmd_report(report_path, dir, out);
    }
    if (*dump) {
      out << dump_config(resolve(dump_opts));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.message() << '\n';
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io]: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace balmse
