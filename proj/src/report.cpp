#include "balmse/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "balmse/errors.hpp"
#include "json.hpp"

namespace balmse {

namespace {

std::string format_value(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void ExperimentReport::add(std::size_t run, std::size_t epochs, const std::string& loss, const std::string& metric,
                           double value) {
  auto [it, inserted] = rows_.emplace(ReportKey{run, epochs, loss, metric}, value);
  require(inserted, ErrorKind::ShapeError,
          "duplicate report cell run=" + std::to_string(run) + " epochs=" + std::to_string(epochs) + " loss=" + loss +
              " metric=" + metric);
}

void ExperimentReport::merge(const ExperimentReport& other) {
  for (const auto& [key, value] : other.rows_) add(key.run, key.epochs, key.loss, key.metric, value);
}

double ExperimentReport::at(const ReportKey& key) const {
  auto it = rows_.find(key);
  require(it != rows_.end(), ErrorKind::ShapeError, "missing report cell " + key.loss + "/" + key.metric);
  return it->second;
}

std::vector<double> ExperimentReport::values(std::size_t epochs, const std::string& loss,
                                             const std::string& metric) const {
  std::vector<double> out;
  for (const auto& [key, value] : rows_) {
    if (key.epochs == epochs && key.loss == loss && key.metric == metric) out.push_back(value);
  }
  return out;
}

Aggregate summarize(std::vector<double> values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  a.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  a.min = values.front();
  a.max = values.back();
  return a;
}

double ExperimentReport::median(std::size_t epochs, const std::string& loss, const std::string& metric) const {
  auto v = values(epochs, loss, metric);
  require(!v.empty(), ErrorKind::ShapeError, "no report values for " + loss + "/" + metric);
  return summarize(std::move(v)).median;
}

std::map<CellKey, Aggregate> ExperimentReport::aggregate() const {
  std::map<CellKey, std::vector<double>> grouped;
  for (const auto& [key, value] : rows_) grouped[{key.epochs, key.loss, key.metric}].push_back(value);
  std::map<CellKey, Aggregate> out;
  for (auto& [key, values] : grouped) out.emplace(key, summarize(std::move(values)));
  return out;
}

void ExperimentReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  out << "run,context,epochs,loss,metric,value\n";
  for (const auto& [key, value] : rows_) {
    out << key.run << ',' << context << ',' << key.epochs << ',' << key.loss << ',' << key.metric << ','
        << format_value(value) << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::IoError, "write failed: " + path.string());
}

void ExperimentReport::write_summary_json(const std::filesystem::path& path) const {
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (const auto& [key, agg] : aggregate()) {
    const auto& [epochs, loss, metric] = key;
    cells[std::to_string(epochs)][loss][metric] = {{"mean", agg.mean}, {"std", agg.std},  {"median", agg.median},
                                                   {"min", agg.min},   {"max", agg.max}, {"n", agg.count}};
  }
  nlohmann::ordered_json doc{{"context", context}, {"cells", std::move(cells)}};
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

ExperimentReport ExperimentReport::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open report " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("run,context,epochs,loss,metric,value", 0) == 0,
          ErrorKind::IoError, path.string() + " is not a report file");
  ExperimentReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    require(f.size() == 6, ErrorKind::IoError, "bad report line " + std::to_string(line_no));
    try {
      report.context = f[1];
      report.add(std::stoull(f[0]), std::stoull(f[2]), f[3], f[4], std::stod(f[5]));
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::IoError, "bad number on report line " + std::to_string(line_no));
    } catch (const std::out_of_range&) {
      fail(ErrorKind::IoError, "number out of range on report line " + std::to_string(line_no));
    }
  }
  return report;
}

}  // namespace balmse
