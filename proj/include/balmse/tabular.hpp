#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace balmse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ColumnKind { Numeric, Categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> categories;  // empty for numeric columns

  bool is_categorical() const { return kind == ColumnKind::Categorical; }
  std::size_t category_count() const { return categories.size(); }
  /// Index of a category label, or nullopt.
  std::optional<int> category_index(const std::string& label) const;

  bool operator==(const Column&) const = default;
};

/// Ordered, validated list of columns. Names are unique and every
/// categorical column has at least two distinct categories.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns);

  std::size_t size() const { return columns_.size(); }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const std::vector<Column>& columns() const { return columns_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  std::size_t numeric_count() const;
  std::size_t categorical_count() const;
  /// Total number of categories over all categorical columns.
  std::size_t category_total() const;
  /// Width of the one-hot + scaled representation.
  std::size_t encoded_width() const { return numeric_count() + category_total(); }

  /// Stable FNV-1a hash over names, kinds and category labels.
  std::uint64_t hash() const;

  /// Sidecar format: one line per column, `name,kind[,cat1|cat2|...]`.
  static Schema read_sidecar(const std::filesystem::path& path);
  void write_sidecar(const std::filesystem::path& path) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Column> columns_;
};

using ColumnData = std::variant<std::vector<double>, std::vector<int>>;

/// Column-oriented table with an optional real-valued target.
/// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<ColumnData> columns,
          std::optional<std::vector<double>> target = std::nullopt,
          std::string target_name = "y");

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return schema_.size(); }

  const std::vector<double>& numeric(std::size_t col) const;
  const std::vector<int>& codes(std::size_t col) const;
  const ColumnData& column_data(std::size_t col) const { return columns_.at(col); }

  bool has_target() const { return target_.has_value(); }
  const std::vector<double>& target() const;
  const std::string& target_name() const { return target_name_; }

  /// Rows selected by index, in the given order.
  Dataset take(const std::vector<std::size_t>& rows) const;
  Dataset without_target() const;
  Dataset with_target(std::vector<double> target, std::string name = "y") const;

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::size_t rows_ = 0;
  std::vector<ColumnData> columns_;
  std::optional<std::vector<double>> target_;
  std::string target_name_ = "y";
};

struct CsvOptions {
  /// When set, the header must match these column names and categorical
  /// cells must belong to the declared category lists.
  std::optional<Schema> schema;
  /// Columns forced to categorical during inference.
  std::vector<std::string> categorical;
  /// Numeric column moved out of the features into the dataset target.
  std::optional<std::string> target;
};

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(const Dataset& data, const std::filesystem::path& path);
/// Schema of the file write_csv produces: the features, then the target as a
/// numeric column.
Schema csv_schema(const Dataset& data);

/// One encoded column: its source variable and, for categoricals, its category.
struct FeatureRef {
  std::size_t column = 0;
  int category = -1;  // -1 for numeric features
  bool is_numeric() const { return category < 0; }
};

/// Statistics fitted on a training split: min/max per numeric column and
/// per-category counts per categorical column, plus the encoded feature map.
class EncoderState {
 public:
  EncoderState() = default;
  EncoderState(Schema schema, std::size_t rows, std::vector<double> mins, std::vector<double> maxs,
               std::vector<std::vector<std::size_t>> counts);

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t width() const { return features_.size(); }

  double min(std::size_t col) const { return mins_.at(col); }
  double max(std::size_t col) const { return maxs_.at(col); }
  const std::vector<std::size_t>& counts(std::size_t col) const { return counts_.at(col); }
  double frequency(std::size_t col, int category) const;

  const FeatureRef& feature(std::size_t j) const { return features_.at(j); }
  const std::vector<FeatureRef>& features() const { return features_; }
  /// First encoded index of a column.
  std::size_t offset(std::size_t col) const { return offsets_.at(col); }
  /// Encoded frequency of feature j; 0 for numeric features.
  double feature_frequency(std::size_t j) const;
  std::vector<std::string> feature_names() const;

  double scale(std::size_t col, double value) const;
  double unscale(std::size_t col, double scaled) const;

 private:
  Schema schema_;
  std::size_t rows_ = 0;
  std::vector<double> mins_;
  std::vector<double> maxs_;
  std::vector<std::vector<std::size_t>> counts_;
  std::vector<FeatureRef> features_;
  std::vector<std::size_t> offsets_;
};

struct EncodedMatrix {
  Matrix values;
  std::shared_ptr<const EncoderState> encoder;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

EncoderState fit_encoder(const Dataset& train);
EncodedMatrix encode(const Dataset& data, const EncoderState& enc);
EncodedMatrix encode(const Dataset& data, std::shared_ptr<const EncoderState> enc);
/// Hard decoding: inverse scaling for numerics, argmax per category group
/// (ties resolve to the lowest index). The target, if any, is not carried.
Dataset decode(const Matrix& values, const EncoderState& enc);
inline Dataset decode(const EncodedMatrix& m) { return decode(m.values, *m.encoder); }

enum class Context { Imbalanced, Balanced, Majority };

Context parse_context(const std::string& name);
std::string to_string(Context context);

using ContextCoefficients = std::array<double, 9>;
inline constexpr ContextCoefficients kUnitCoefficients{1, 1, 1, 1, 1, 1, 1, 1, 1};

/// Schema of the synthetic benchmark: X1..X3 numeric, Q1..Q5 categorical.
Schema synthetic_schema();
/// Category probabilities of Q1..Q5, in schema order.
const std::vector<std::vector<double>>& synthetic_probabilities();

/// Synthetic mixed dataset with target. Columns are sampled in schema order
/// (X1, X2, X3, Q1..Q5), each over all rows, followed by the target noise.
Dataset generate_synthetic(Context context, std::size_t n, std::uint64_t seed,
                           const ContextCoefficients& coeffs = kUnitCoefficients);

/// Random partition; test size is round(test_fraction * n).
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace balmse
