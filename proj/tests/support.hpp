#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "balmse/rng.hpp"
#include "balmse/tabular.hpp"

namespace testing {

using balmse::Matrix;
using balmse::Vector;

inline Matrix random_matrix(balmse::Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("balmse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// a numeric in {2,4,6,...}, b categorical over {x, y, z}.
inline balmse::Dataset small_mixed(std::vector<double> a, std::vector<int> b,
                                   std::vector<std::string> cats = {"x", "y", "z"}) {
  using namespace balmse;
  Schema schema({Column{"a", ColumnKind::Numeric, {}}, Column{"b", ColumnKind::Categorical, std::move(cats)}});
  return Dataset(schema, {ColumnData(std::move(a)), ColumnData(std::move(b))});
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace testing
