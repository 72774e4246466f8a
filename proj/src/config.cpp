#include "balmse/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "balmse/errors.hpp"
#include "json.hpp"

namespace balmse {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "autoencoder" || name == "ae") return ModelKind::Autoencoder;
  if (name == "vae") return ModelKind::Vae;
  fail(ErrorKind::ConfigError, "unknown model kind '" + name + "' (expected autoencoder|vae)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Vae ? "vae" : "autoencoder"; }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::ConfigError,
          key + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size(), ErrorKind::ConfigError,
          key + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorKind::ConfigError, key + ": expected true or false, got '" + text + "'");
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::vector<Field> fields(RunConfig& c) {
  auto& e = c.experiment;
  auto& d = e.data;
  auto sz = [](std::size_t& ref, std::string name) {
    return std::pair<std::function<std::string()>, std::function<void(const std::string&)>>{
        [&ref] { return std::to_string(ref); },
        [&ref, name](const std::string& v) { ref = static_cast<std::size_t>(parse_unsigned(name, v)); }};
  };
  auto dbl = [](double& ref, std::string name) {
    return std::pair<std::function<std::string()>, std::function<void(const std::string&)>>{
        [&ref] { return format_double(ref); }, [&ref, name](const std::string& v) { ref = parse_double(name, v); }};
  };
  std::vector<Field> out;
  auto add = [&out](std::string section, std::string key, auto accessors) {
    out.push_back({std::move(section), std::move(key), accessors.first, accessors.second});
  };
  using Pair = std::pair<std::function<std::string()>, std::function<void(const std::string&)>>;

  add("data", "source", Pair{[&d] { return std::string(d.synthetic ? "synthetic" : "csv"); },
                             [&d](const std::string& v) {
                               require(v == "synthetic" || v == "csv", ErrorKind::ConfigError,
                                       "data.source: expected synthetic or csv, got '" + v + "'");
                               d.synthetic = v == "synthetic";
                             }});
  add("data", "context", Pair{[&d] { return to_string(d.context); },
                              [&d](const std::string& v) { d.context = parse_context(v); }});
  add("data", "n", sz(d.n, "data.n"));
  add("data", "coefficients", Pair{[&d] {
                                     std::vector<std::string> items;
                                     for (double a : d.coefficients) items.push_back(format_double(a));
                                     return join(items);
                                   },
                                   [&d](const std::string& v) {
                                     const auto items = split_list(v);
                                     require(items.size() == d.coefficients.size(), ErrorKind::ConfigError,
                                             "data.coefficients: expected 9 values");
                                     for (std::size_t i = 0; i < items.size(); ++i) {
                                       d.coefficients[i] = parse_double("data.coefficients", items[i]);
                                     }
                                   }});
  add("data", "csv", Pair{[&d] { return d.csv.string(); }, [&d](const std::string& v) { d.csv = v; }});
  add("data", "schema", Pair{[&d] { return d.schema ? d.schema->string() : std::string(); },
                             [&d](const std::string& v) {
                               if (v.empty()) d.schema.reset();
                               else d.schema = v;
                             }});
  add("data", "target", Pair{[&d] { return d.target; }, [&d](const std::string& v) { d.target = v; }});
  add("data", "categorical", Pair{[&d] { return join(d.categorical); },
                                  [&d](const std::string& v) { d.categorical = split_list(v); }});

  add("model", "kind", Pair{[&c] { return to_string(c.model); },
                            [&c](const std::string& v) { c.model = parse_model_kind(v); }});
  add("model", "dim_z", sz(e.dim_z, "model.dim_z"));
  add("model", "batch_size", sz(e.batch_size, "model.batch_size"));
  add("model", "learning_rate", dbl(e.learning_rate, "model.learning_rate"));
  add("model", "vae_dim_hl", sz(e.vae.dim_hl, "model.vae_dim_hl"));
  add("model", "vae_dim_z", sz(e.vae.dim_z, "model.vae_dim_z"));
  add("model", "vae_batch_size", sz(e.vae.batch_size, "model.vae_batch_size"));
  add("model", "vae_learning_rate", dbl(e.vae.learning_rate, "model.vae_learning_rate"));
  add("model", "vae_kl_weight", dbl(e.vae.kl_weight, "model.vae_kl_weight"));

  add("experiment", "task", Pair{[&e] { return to_string(e.task); },
                                 [&e](const std::string& v) { e.task = parse_task(v); }});
  add("experiment", "runs", sz(e.runs, "experiment.runs"));
  add("experiment", "test_fraction", dbl(e.test_fraction, "experiment.test_fraction"));
  add("experiment", "epochs", Pair{[&e] {
                                     std::vector<std::string> items;
                                     for (auto x : e.epochs) items.push_back(std::to_string(x));
                                     return join(items);
                                   },
                                   [&e](const std::string& v) {
                                     e.epochs.clear();
                                     for (const auto& item : split_list(v)) {
                                       e.epochs.push_back(parse_unsigned("experiment.epochs", item));
                                     }
                                   }});
  add("experiment", "losses", Pair{[&e] {
                                     std::vector<std::string> items;
                                     for (const auto& l : e.losses) items.push_back(to_string(l));
                                     return join(items);
                                   },
                                   [&e](const std::string& v) {
                                     e.losses.clear();
                                     for (const auto& item : split_list(v)) e.losses.push_back(parse_loss(item));
                                   }});
  add("experiment", "clustering_k", sz(e.clustering_k, "experiment.clustering_k"));
  add("experiment", "ridge_lambda", dbl(e.ridge_lambda, "experiment.ridge_lambda"));
  add("experiment", "logistic_steps", sz(e.logistic.steps, "experiment.logistic_steps"));
  add("experiment", "logistic_learning_rate", dbl(e.logistic.learning_rate, "experiment.logistic_learning_rate"));
  add("experiment", "logistic_lambda", dbl(e.logistic.lambda, "experiment.logistic_lambda"));

  add("run", "seed", Pair{[&e] { return std::to_string(e.seed); },
                          [&e](const std::string& v) { e.seed = parse_unsigned("run.seed", v); }});
  add("run", "jobs", sz(e.jobs, "run.jobs"));
  add("run", "out", Pair{[&c] { return c.out.string(); }, [&c](const std::string& v) { c.out = v; }});
  add("run", "write_curves", Pair{[&e] { return std::string(e.curves_dir ? "true" : "false"); },
                                  [&e](const std::string& v) {
                                    if (parse_bool("run.write_curves", v)) e.curves_dir = "curves";
                                    else e.curves_dir.reset();
                                  }});
  return out;
}

void assign(RunConfig& config, const std::map<std::pair<std::string, std::string>, std::string>& values) {
  auto table = fields(config);
  for (const auto& [where, value] : values) {
    const auto& [section, key] = where;
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const Field& f) { return f.section == section && f.key == key; });
    require(it != table.end(), ErrorKind::ConfigError, "unknown config key '" + section + "." + key + "'");
    it->set(value);
  }
}

std::string json_scalar(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_null()) return {};
  fail(ErrorKind::ConfigError, where + ": unsupported JSON value");
}

std::map<std::pair<std::string, std::string>, std::string> read_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorKind::ConfigError, "JSON config must be an object of sections");
  std::map<std::pair<std::string, std::string>, std::string> values;
  for (const auto& [section, body] : doc.items()) {
    require(body.is_object(), ErrorKind::ConfigError, "JSON section '" + section + "' must be an object");
    for (const auto& [key, v] : body.items()) {
      const auto where = section + "." + key;
      std::string value;
      if (v.is_array()) {
        std::vector<std::string> items;
        for (const auto& item : v) items.push_back(json_scalar(item, where));
        value = join(items);
      } else {
        value = json_scalar(v, where);
      }
      values[{section, key}] = value;
    }
  }
  return values;
}

std::map<std::pair<std::string, std::string>, std::string> read_ini(const std::string& text) {
  std::map<std::pair<std::string, std::string>, std::string> values;
  std::stringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto at = "config line " + std::to_string(line_no);
    if (t.front() == '[') {
      require(t.back() == ']' && t.size() > 2, ErrorKind::ConfigError, at + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    require(eq != std::string::npos, ErrorKind::ConfigError, at + ": expected key = value");
    require(!section.empty(), ErrorKind::ConfigError, at + ": key outside of a section");
    const auto key = trim(t.substr(0, eq));
    require(!key.empty(), ErrorKind::ConfigError, at + ": empty key");
    require(values.emplace(std::pair{section, key}, trim(t.substr(eq + 1))).second, ErrorKind::ConfigError,
            at + ": duplicate key '" + section + "." + key + "'");
  }
  return values;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = first != std::string::npos && text[first] == '{';
  assign(config, json ? read_json(text) : read_ini(text));
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::ConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& config) {
  RunConfig copy = config;
  std::string out;
  std::string section;
  for (const auto& f : fields(copy)) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get() + "\n";
  }
  return out;
}

}  // namespace balmse
