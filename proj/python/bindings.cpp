#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "balmse/cli.hpp"
#include "balmse/config.hpp"
#include "balmse/errors.hpp"
#include "balmse/eval.hpp"
#include "balmse/losses.hpp"
#include "balmse/metrics.hpp"
#include "balmse/models.hpp"

namespace py = pybind11;
using namespace balmse;

namespace {

LossWeights make_weights(const Vector& on_one, const Vector& on_zero, const std::vector<bool>& categorical) {
  require(on_one.size() == on_zero.size() && static_cast<std::size_t>(on_one.size()) == categorical.size(),
          ErrorKind::ShapeError, "weight vectors and categorical flags must have equal length");
  return {on_one, on_zero, categorical};
}

py::tuple loss_tuple(const LossResult& r) { return py::make_tuple(r.value, r.grad); }

py::list report_rows(const ExperimentReport& report) {
  py::list rows;
  for (const auto& [key, value] : report.rows()) {
    rows.append(py::make_tuple(key.run, report.context, key.epochs, key.loss, key.metric, value));
  }
  return rows;
}

Dataset load(const std::filesystem::path& path, const std::optional<std::string>& target) {
  CsvOptions options;
  options.target = target;
  return read_csv(path, options);
}

}  // namespace

PYBIND11_MODULE(_balmse, m) {
  m.doc() = "Balanced MSE autoencoders for mixed tabular data";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error(m, "BalmseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("generate_csv", [](const std::filesystem::path& path, const std::string& context, std::size_t n,
                           std::uint64_t seed) {
        const auto data = generate_synthetic(parse_context(context), n, seed);
        write_csv(data, path);
        auto sidecar = path;
        sidecar += ".schema";
        csv_schema(data).write_sidecar(sidecar);
      },
        py::arg("path"), py::arg("context") = "imbalanced", py::arg("n") = 2000, py::arg("seed") = 0);

  m.def("encode_csv", [](const std::filesystem::path& path, std::optional<std::string> target) {
        const auto data = load(path, target);
        const auto enc = fit_encoder(data.without_target());
        return py::make_tuple(encode(data.without_target(), enc).values, enc.feature_names());
      },
        py::arg("path"), py::arg("target") = "y", "Min-max / one-hot encoded features and their names.");

  m.def("balance_weights", [](const std::filesystem::path& path, std::optional<std::string> target) {
        const auto data = load(path, target);
        const auto w = compute_balance_weights(fit_encoder(data.without_target()));
        return py::make_tuple(w.on_one, w.on_zero, w.categorical);
      },
        py::arg("path"), py::arg("target") = "y", "Per-feature (on_one, on_zero, categorical) loss weights.");

  m.def("mse_loss", [](const Matrix& pred, const Matrix& target) { return loss_tuple(mse_loss(pred, target)); },
        py::arg("pred"), py::arg("target"));
  m.def("balanced_mse_loss",
        [](const Matrix& pred, const Matrix& target, const Vector& on_one, const Vector& on_zero,
           const std::vector<bool>& categorical) {
          return loss_tuple(balanced_mse_loss(pred, target, make_weights(on_one, on_zero, categorical)));
        },
        py::arg("pred"), py::arg("target"), py::arg("on_one"), py::arg("on_zero"), py::arg("categorical"));
  m.def("blended_loss",
        [](double alpha, const Matrix& pred, const Matrix& target, const Vector& on_one, const Vector& on_zero,
           const std::vector<bool>& categorical) {
          return loss_tuple(blended_loss(alpha, pred, target, make_weights(on_one, on_zero, categorical)));
        },
        py::arg("alpha"), py::arg("pred"), py::arg("target"), py::arg("on_one"), py::arg("on_zero"),
        py::arg("categorical"));

  m.def("balanced_accuracy", [](std::vector<int> t, std::vector<int> p) { return balanced_accuracy(t, p); });
  m.def("binary_auc", [](std::vector<int> t, std::vector<double> s) { return binary_auc(t, s); });
  m.def("spearman", [](std::vector<double> x, std::vector<double> y) { return spearman(x, y); });
  m.def("cramers_v", [](std::vector<int> a, std::vector<int> b) { return cramers_v(a, b); });
  m.def("eta_squared", [](std::vector<double> x, std::vector<int> g) { return eta_squared(x, g); });
  m.def("silhouette", [](const Matrix& points, std::vector<int> labels) { return silhouette(points, labels); });
  m.def("kmeans",
        [](const Matrix& points, std::size_t k, std::uint64_t seed) {
          const auto r = kmeans(points, k, seed);
          return py::make_tuple(r.labels, r.centroids, r.inertia());
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  m.def("reparameterize", &reparameterize, py::arg("mu"), py::arg("logvar"), py::arg("noise"));
  m.def("gaussian_kl", &gaussian_kl, py::arg("mu"), py::arg("logvar"));

  m.def("default_config", [] { return dump_config(RunConfig{}); });
  m.def("run_experiment",
        [](const std::string& config_text) {
          auto config = parse_config(config_text);
          config.experiment.curves_dir.reset();
          ExperimentReport report;
          {
            py::gil_scoped_release release;
            report = config.model == ModelKind::Vae ? vae_experiment(config.experiment)
                                                    : run_experiment(config.experiment);
          }
          return report_rows(report);
        },
        py::arg("config"), "Run an experiment from config text; rows are (run, context, epochs, loss, metric, value).");

  m.def("cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "balmse");
          std::vector<const char*> argv;
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in process; returns (exit_code, stdout, stderr).");
}
