#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace balmse {

struct ReportKey {
  std::size_t run = 0;
  std::size_t epochs = 0;  // 0 for loss-independent baseline rows
  std::string loss;
  std::string metric;

  auto operator<=>(const ReportKey&) const = default;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// (epochs, loss, metric)
using CellKey = std::tuple<std::size_t, std::string, std::string>;

/// Long-format experiment results keyed by (run, epochs, loss, metric).
/// Keyed storage makes assembly independent of the order runs finish in.
class ExperimentReport {
 public:
  std::string context;

  /// Throws ShapeError if the cell already exists.
  void add(std::size_t run, std::size_t epochs, const std::string& loss, const std::string& metric, double value);
  void merge(const ExperimentReport& other);

  const std::map<ReportKey, double>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const ReportKey& key) const { return rows_.count(key) > 0; }
  double at(const ReportKey& key) const;

  /// Values over runs for one cell, in run order.
  std::vector<double> values(std::size_t epochs, const std::string& loss, const std::string& metric) const;
  double median(std::size_t epochs, const std::string& loss, const std::string& metric) const;
  std::map<CellKey, Aggregate> aggregate() const;

  /// Columns: run,context,epochs,loss,metric,value
  void write_csv(const std::filesystem::path& path) const;
  /// {"context": ..., "cells": {"<epochs>": {"<loss>": {"<metric>": {mean, std, median, min, max, n}}}}}
  void write_summary_json(const std::filesystem::path& path) const;
  static ExperimentReport read_csv(const std::filesystem::path& path);

 private:
  std::map<ReportKey, double> rows_;
};

Aggregate summarize(std::vector<double> values);

}  // namespace balmse
