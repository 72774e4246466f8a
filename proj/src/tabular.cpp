#include "balmse/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "balmse/errors.hpp"
#include "balmse/rng.hpp"

namespace balmse {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;  // field separator
  h *= 0x100000001b3ULL;
  return h;
}

}  // namespace

// ---------------------------------------------------------------- Schema

std::optional<int> Column::category_index(const std::string& label) const {
  auto it = std::find(categories.begin(), categories.end(), label);
  if (it == categories.end()) return std::nullopt;
  return static_cast<int>(it - categories.begin());
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  for (const auto& c : columns_) {
    require(!c.name.empty(), ErrorKind::SchemaInvalid, "empty column name");
    require(names.insert(c.name).second, ErrorKind::SchemaInvalid, "duplicate column name '" + c.name + "'");
    if (c.is_categorical()) {
      require(c.categories.size() >= 2, ErrorKind::SchemaInvalid,
              "categorical column '" + c.name + "' needs at least 2 categories");
      std::set<std::string> cats(c.categories.begin(), c.categories.end());
      require(cats.size() == c.categories.size(), ErrorKind::SchemaInvalid,
              "duplicate category in column '" + c.name + "'");
    } else {
      require(c.categories.empty(), ErrorKind::SchemaInvalid,
              "numeric column '" + c.name + "' lists categories");
    }
  }
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::numeric_count() const {
  return static_cast<std::size_t>(
      std::count_if(columns_.begin(), columns_.end(), [](const Column& c) { return !c.is_categorical(); }));
}

std::size_t Schema::categorical_count() const { return columns_.size() - numeric_count(); }

std::size_t Schema::category_total() const {
  std::size_t total = 0;
  for (const auto& c : columns_) total += c.categories.size();
  return total;
}

std::uint64_t Schema::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& c : columns_) {
    h = fnv1a(h, c.name);
    h = fnv1a(h, c.is_categorical() ? "categorical" : "numeric");
    for (const auto& cat : c.categories) h = fnv1a(h, cat);
  }
  return h;
}

Schema Schema::read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open schema file " + path.string());
  std::vector<Column> columns;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_on(line, ',');
    require(fields.size() == 2 || fields.size() == 3, ErrorKind::SchemaInvalid, "bad schema line: " + line);
    Column col;
    col.name = fields[0];
    if (fields[1] == "numeric") {
      require(fields.size() == 2, ErrorKind::SchemaInvalid, "numeric column with categories: " + line);
      col.kind = ColumnKind::Numeric;
    } else if (fields[1] == "categorical") {
      require(fields.size() == 3, ErrorKind::SchemaInvalid, "categorical column without categories: " + line);
      col.kind = ColumnKind::Categorical;
      col.categories = split_on(fields[2], '|');
    } else {
      fail(ErrorKind::SchemaInvalid, "unknown column kind '" + fields[1] + "'");
    }
    columns.push_back(std::move(col));
  }
  return Schema(std::move(columns));
}

void Schema::write_sidecar(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write schema file " + path.string());
  for (const auto& c : columns_) {
    out << c.name << ',' << (c.is_categorical() ? "categorical" : "numeric");
    if (c.is_categorical()) {
      out << ',';
      for (std::size_t k = 0; k < c.categories.size(); ++k) out << (k ? "|" : "") << c.categories[k];
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(Schema schema, std::vector<ColumnData> columns, std::optional<std::vector<double>> target,
                 std::string target_name)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      target_(std::move(target)),
      target_name_(std::move(target_name)) {
  require(columns_.size() == schema_.size(), ErrorKind::ShapeError, "column count does not match schema");
  rows_ = 0;
  if (!columns_.empty()) {
    rows_ = std::visit([](const auto& v) { return v.size(); }, columns_.front());
  } else if (target_) {
    rows_ = target_->size();
  }
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& col = schema_.column(j);
    if (col.is_categorical()) {
      const auto* codes = std::get_if<std::vector<int>>(&columns_[j]);
      require(codes != nullptr, ErrorKind::SchemaMismatch, "column '" + col.name + "' should hold category codes");
      require(codes->size() == rows_, ErrorKind::ShapeError, "column '" + col.name + "' has wrong length");
      for (int c : *codes) {
        require(c >= 0 && static_cast<std::size_t>(c) < col.category_count(), ErrorKind::UnknownCategory,
                "category index out of range in column '" + col.name + "'");
      }
    } else {
      const auto* values = std::get_if<std::vector<double>>(&columns_[j]);
      require(values != nullptr, ErrorKind::SchemaMismatch, "column '" + col.name + "' should hold reals");
      require(values->size() == rows_, ErrorKind::ShapeError, "column '" + col.name + "' has wrong length");
    }
  }
  if (target_) {
    require(target_->size() == rows_, ErrorKind::ShapeError, "target has wrong length");
  }
}

const std::vector<double>& Dataset::numeric(std::size_t col) const {
  const auto* values = std::get_if<std::vector<double>>(&columns_.at(col));
  require(values != nullptr, ErrorKind::SchemaMismatch, "column " + std::to_string(col) + " is not numeric");
  return *values;
}

const std::vector<int>& Dataset::codes(std::size_t col) const {
  const auto* codes = std::get_if<std::vector<int>>(&columns_.at(col));
  require(codes != nullptr, ErrorKind::SchemaMismatch, "column " + std::to_string(col) + " is not categorical");
  return *codes;
}

const std::vector<double>& Dataset::target() const {
  require(target_.has_value(), ErrorKind::SchemaMismatch, "dataset has no target");
  return *target_;
}

Dataset Dataset::take(const std::vector<std::size_t>& rows) const {
  std::vector<ColumnData> columns;
  columns.reserve(columns_.size());
  for (const auto& data : columns_) {
    columns.push_back(std::visit(
        [&](const auto& v) -> ColumnData {
          std::remove_cvref_t<decltype(v)> out;
          out.reserve(rows.size());
          for (auto r : rows) out.push_back(v.at(r));
          return out;
        },
        data));
  }
  std::optional<std::vector<double>> target;
  if (target_) {
    target.emplace();
    target->reserve(rows.size());
    for (auto r : rows) target->push_back(target_->at(r));
  }
  return Dataset(schema_, std::move(columns), std::move(target), target_name_);
}

Dataset Dataset::without_target() const { return Dataset(schema_, columns_, std::nullopt, target_name_); }

Dataset Dataset::with_target(std::vector<double> target, std::string name) const {
  return Dataset(schema_, columns_, std::move(target), std::move(name));
}

// ---------------------------------------------------------------- CSV

Schema csv_schema(const Dataset& data) {
  auto columns = data.schema().columns();
  if (data.has_target()) columns.push_back({data.target_name(), ColumnKind::Numeric, {}});
  return Schema(std::move(columns));
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path.string());

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::ShapeError, "missing header row in " + path.string());
  const auto header = split_on(line, ',');

  std::vector<std::vector<std::string>> cells(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_on(line, ',');
    require(fields.size() == header.size(), ErrorKind::ShapeError,
            "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(header.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      require(!fields[j].empty(), ErrorKind::MissingValue,
              "empty cell at line " + std::to_string(line_no) + ", column '" + header[j] + "'");
      cells[j].push_back(std::move(fields[j]));
    }
  }

  // Resolve the full column list (target included) before splitting the target off.
  std::vector<Column> columns;
  if (options.schema) {
    const auto& schema = *options.schema;
    require(schema.size() == header.size(), ErrorKind::SchemaMismatch, "header width does not match schema");
    for (std::size_t j = 0; j < header.size(); ++j) {
      require(schema.column(j).name == header[j], ErrorKind::SchemaMismatch,
              "header column '" + header[j] + "' does not match schema column '" + schema.column(j).name + "'");
    }
    columns = schema.columns();
  } else {
    for (std::size_t j = 0; j < header.size(); ++j) {
      Column col;
      col.name = header[j];
      const bool forced = std::find(options.categorical.begin(), options.categorical.end(), header[j]) !=
                          options.categorical.end();
      const bool non_numeric =
          std::any_of(cells[j].begin(), cells[j].end(), [](const std::string& s) { return !parse_double(s); });
      if (forced || non_numeric) {
        col.kind = ColumnKind::Categorical;
        for (const auto& s : cells[j]) {
          if (std::find(col.categories.begin(), col.categories.end(), s) == col.categories.end()) {
            col.categories.push_back(s);
          }
        }
      }
      columns.push_back(std::move(col));
    }
  }

  std::optional<std::size_t> target_index;
  if (options.target) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].name == *options.target) target_index = j;
    }
    require(target_index.has_value(), ErrorKind::SchemaMismatch, "target column '" + *options.target + "' not found");
    require(!columns[*target_index].is_categorical(), ErrorKind::SchemaMismatch,
            "target column '" + *options.target + "' must be numeric");
  }

  std::vector<Column> feature_columns;
  std::vector<ColumnData> data;
  std::optional<std::vector<double>> target;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = columns[j];
    if (col.is_categorical()) {
      std::vector<int> codes;
      codes.reserve(cells[j].size());
      for (const auto& s : cells[j]) {
        auto idx = col.category_index(s);
        require(idx.has_value(), ErrorKind::UnknownCategory, "'" + s + "' is not a category of '" + col.name + "'");
        codes.push_back(*idx);
      }
      data.emplace_back(std::move(codes));
    } else {
      std::vector<double> values;
      values.reserve(cells[j].size());
      for (const auto& s : cells[j]) {
        auto v = parse_double(s);
        require(v.has_value(), ErrorKind::SchemaMismatch, "non-numeric value '" + s + "' in column '" + col.name + "'");
        values.push_back(*v);
      }
      if (target_index && *target_index == j) {
        target = std::move(values);
        continue;
      }
      data.emplace_back(std::move(values));
    }
    feature_columns.push_back(col);
  }

  return Dataset(Schema(std::move(feature_columns)), std::move(data), std::move(target),
                 options.target.value_or("y"));
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  const auto& schema = data.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) out << (j ? "," : "") << schema.column(j).name;
  if (data.has_target()) out << (schema.size() ? "," : "") << data.target_name();
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (j) out << ',';
      const auto& col = schema.column(j);
      if (col.is_categorical()) {
        out << col.categories[static_cast<std::size_t>(data.codes(j)[i])];
      } else {
        out << format_double(data.numeric(j)[i]);
      }
    }
    if (data.has_target()) out << (schema.size() ? "," : "") << format_double(data.target()[i]);
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------- Encoder

EncoderState::EncoderState(Schema schema, std::size_t rows, std::vector<double> mins, std::vector<double> maxs,
                           std::vector<std::vector<std::size_t>> counts)
    : schema_(std::move(schema)),
      rows_(rows),
      mins_(std::move(mins)),
      maxs_(std::move(maxs)),
      counts_(std::move(counts)) {
  const auto p = schema_.size();
  require(mins_.size() == p && maxs_.size() == p && counts_.size() == p, ErrorKind::ShapeError,
          "encoder statistics do not match schema");
  offsets_.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    offsets_.push_back(features_.size());
    const auto& col = schema_.column(j);
    if (col.is_categorical()) {
      require(counts_[j].size() == col.category_count(), ErrorKind::ShapeError, "category counts do not match schema");
      for (std::size_t k = 0; k < col.category_count(); ++k) features_.push_back({j, static_cast<int>(k)});
    } else {
      features_.push_back({j, -1});
    }
  }
}

double EncoderState::frequency(std::size_t col, int category) const {
  return static_cast<double>(counts_.at(col).at(static_cast<std::size_t>(category))) / static_cast<double>(rows_);
}

double EncoderState::feature_frequency(std::size_t j) const {
  const auto& f = features_.at(j);
  return f.is_numeric() ? 0.0 : frequency(f.column, f.category);
}

std::vector<std::string> EncoderState::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features_.size());
  for (const auto& f : features_) {
    const auto& col = schema_.column(f.column);
    names.push_back(f.is_numeric() ? col.name : col.name + "=" + col.categories[static_cast<std::size_t>(f.category)]);
  }
  return names;
}

double EncoderState::scale(std::size_t col, double value) const {
  const double s = (value - mins_[col]) / (maxs_[col] - mins_[col]);
  return std::clamp(s, 0.0, 1.0);
}

double EncoderState::unscale(std::size_t col, double scaled) const {
  return mins_[col] + scaled * (maxs_[col] - mins_[col]);
}

EncoderState fit_encoder(const Dataset& train) {
  require(train.rows() >= 2, ErrorKind::ShapeError, "fit_encoder needs at least 2 rows");
  const auto& schema = train.schema();
  const auto p = schema.size();
  std::vector<double> mins(p, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> maxs(p, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<std::size_t>> counts(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& col = schema.column(j);
    if (col.is_categorical()) {
      counts[j].assign(col.category_count(), 0);
      for (int c : train.codes(j)) ++counts[j][static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < counts[j].size(); ++k) {
        require(counts[j][k] > 0, ErrorKind::EmptyCategory,
                "category '" + col.categories[k] + "' of '" + col.name + "' is absent from the training split");
      }
    } else {
      const auto& v = train.numeric(j);
      auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      require(*hi > *lo, ErrorKind::ConstantNumeric, "numeric column '" + col.name + "' is constant");
      mins[j] = *lo;
      maxs[j] = *hi;
    }
  }
  return EncoderState(schema, train.rows(), std::move(mins), std::move(maxs), std::move(counts));
}

EncodedMatrix encode(const Dataset& data, const EncoderState& enc) {
  return encode(data, std::make_shared<const EncoderState>(enc));
}

EncodedMatrix encode(const Dataset& data, std::shared_ptr<const EncoderState> enc) {
  require(data.schema() == enc->schema(), ErrorKind::SchemaMismatch, "dataset schema differs from encoder schema");
  const auto n = static_cast<Eigen::Index>(data.rows());
  Matrix values = Matrix::Zero(n, static_cast<Eigen::Index>(enc->width()));
  for (std::size_t j = 0; j < data.cols(); ++j) {
    const auto off = static_cast<Eigen::Index>(enc->offset(j));
    if (data.schema().column(j).is_categorical()) {
      const auto& codes = data.codes(j);
      for (Eigen::Index i = 0; i < n; ++i) values(i, off + codes[static_cast<std::size_t>(i)]) = 1.0;
    } else {
      const auto& v = data.numeric(j);
      for (Eigen::Index i = 0; i < n; ++i) values(i, off) = enc->scale(j, v[static_cast<std::size_t>(i)]);
    }
  }
  return {std::move(values), std::move(enc)};
}

Dataset decode(const Matrix& values, const EncoderState& enc) {
  require(static_cast<std::size_t>(values.cols()) == enc.width(), ErrorKind::ShapeError,
          "decode: matrix width " + std::to_string(values.cols()) + " != encoder width " + std::to_string(enc.width()));
  const auto& schema = enc.schema();
  const auto n = values.rows();
  std::vector<ColumnData> columns;
  columns.reserve(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& col = schema.column(j);
    const auto off = static_cast<Eigen::Index>(enc.offset(j));
    if (col.is_categorical()) {
      std::vector<int> codes(static_cast<std::size_t>(n));
      const auto width = static_cast<Eigen::Index>(col.category_count());
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < width; ++k) {
          if (values(i, off + k) > values(i, off + best)) best = k;
        }
        codes[static_cast<std::size_t>(i)] = static_cast<int>(best);
      }
      columns.emplace_back(std::move(codes));
    } else {
      std::vector<double> v(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = enc.unscale(j, values(i, off));
      columns.emplace_back(std::move(v));
    }
  }
  return Dataset(schema, std::move(columns));
}

// ---------------------------------------------------------------- Synthetic data

Context parse_context(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "imbalanced") return Context::Imbalanced;
  if (lower == "balanced") return Context::Balanced;
  if (lower == "majority") return Context::Majority;
  fail(ErrorKind::InvalidContext, "unknown context '" + name + "'");
}

std::string to_string(Context context) {
  switch (context) {
    case Context::Imbalanced: return "imbalanced";
    case Context::Balanced: return "balanced";
    case Context::Majority: return "majority";
  }
  fail(ErrorKind::InvalidContext, "invalid context value");
}

namespace {

struct SyntheticVariable {
  const char* name;
  std::vector<std::string> categories;
  std::vector<double> probabilities;
};

const std::vector<SyntheticVariable>& synthetic_variables() {
  // Repeated probability labels get a _1, _2, ... suffix to keep category names unique.
  static const std::vector<SyntheticVariable> vars{
      {"Q1", {"Q1.70", "Q1.30"}, {0.70, 0.30}},
      {"Q2", {"Q2.10", "Q2.20", "Q2.29", "Q2.31", "Q2.02", "Q2.08"}, {0.10, 0.20, 0.29, 0.31, 0.02, 0.08}},
      {"Q3", {"Q3.60", "Q3.20", "Q3.17", "Q3.03"}, {0.60, 0.20, 0.17, 0.03}},
      {"Q4",
       {"Q4.10_1", "Q4.10_2", "Q4.10_3", "Q4.10_4", "Q4.10_5", "Q4.15", "Q4.05", "Q4.30"},
       {0.10, 0.10, 0.10, 0.10, 0.10, 0.15, 0.05, 0.30}},
      {"Q5",
       {"Q5.25_1", "Q5.25_2", "Q5.10_1", "Q5.10_2", "Q5.05_1", "Q5.05_2", "Q5.05_3", "Q5.05_4", "Q5.09", "Q5.01"},
       {0.25, 0.25, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05, 0.09, 0.01}},
  };
  return vars;
}

// Category (within its variable) whose indicator enters the mean of Y, per
// context, for coefficients alpha_4..alpha_9.
struct Indicator {
  std::size_t variable;  // 0-based index into Q1..Q5
  int category;
};

std::array<Indicator, 6> context_indicators(Context context) {
  switch (context) {
    case Context::Imbalanced:
      // Q1.30, Q2.02, Q3.03, Q4.05, Q5.01, Q5.05
      return {{{0, 1}, {1, 4}, {2, 3}, {3, 6}, {4, 9}, {4, 4}}};
    case Context::Balanced:
    case Context::Majority:
      // Q1.70, Q2.29, Q3.60, Q4.30, Q5.25, Q5.10
      return {{{0, 0}, {1, 2}, {2, 0}, {3, 7}, {4, 0}, {4, 2}}};
  }
  fail(ErrorKind::InvalidContext, "invalid context value");
}

}  // namespace

Schema synthetic_schema() {
  std::vector<Column> columns{{"X1", ColumnKind::Numeric, {}},
                              {"X2", ColumnKind::Numeric, {}},
                              {"X3", ColumnKind::Numeric, {}}};
  for (const auto& v : synthetic_variables()) columns.push_back({v.name, ColumnKind::Categorical, v.categories});
  return Schema(std::move(columns));
}

const std::vector<std::vector<double>>& synthetic_probabilities() {
  static const std::vector<std::vector<double>> probs = [] {
    std::vector<std::vector<double>> out;
    for (const auto& v : synthetic_variables()) out.push_back(v.probabilities);
    return out;
  }();
  return probs;
}

Dataset generate_synthetic(Context context, std::size_t n, std::uint64_t seed, const ContextCoefficients& coeffs) {
  require(n >= 1, ErrorKind::ShapeError, "generate_synthetic needs n >= 1");
  const auto indicators = context_indicators(context);  // validates context
  Rng rng(seed);

  constexpr std::array<std::pair<double, double>, 3> gaussians{{{0.0, 1.0}, {10.0, 2.0}, {10.0, 2.0}}};
  constexpr double kNoiseSd = 0.5;

  std::vector<ColumnData> columns;
  std::vector<std::vector<double>> xs;
  for (auto [mean, sd] : gaussians) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(mean, sd);
    xs.push_back(v);
    columns.emplace_back(std::move(v));
  }
  std::vector<std::vector<int>> qs;
  for (const auto& var : synthetic_variables()) {
    std::vector<int> codes(n);
    for (auto& c : codes) c = static_cast<int>(rng.categorical(var.probabilities));
    qs.push_back(codes);
    columns.emplace_back(std::move(codes));
  }

  const bool uses_numeric = context != Context::Majority;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    if (uses_numeric) {
      for (std::size_t k = 0; k < 3; ++k) mu += coeffs[k] * xs[k][i];
    }
    for (std::size_t k = 0; k < indicators.size(); ++k) {
      const auto& ind = indicators[k];
      if (qs[ind.variable][i] == ind.category) mu += coeffs[3 + k];
    }
    y[i] = rng.normal(mu, kNoiseSd);
  }
  return Dataset(synthetic_schema(), std::move(columns), std::move(y), "y");
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::FractionOutOfRange,
          "test fraction must lie in (0, 1)");
  const auto n = data.rows();
  const auto test_n = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  require(test_n >= 1 && test_n < n, ErrorKind::FractionOutOfRange,
          "test fraction " + std::to_string(test_fraction) + " leaves an empty split for n=" + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_n));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(test_n), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.take(train), data.take(test)};
}

}  // namespace balmse
