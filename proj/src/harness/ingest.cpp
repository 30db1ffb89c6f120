#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"
#include "renyi/random.hpp"
#include "renyi/synthetic.hpp"

namespace renyi::harness {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name, const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorKind::invalid_argument, path + ": column '" + name + "' not found in header");
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN"; }

}  // namespace

CsvColumns read_csv_columns(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) fail(ErrorKind::invalid_argument, where + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_fields(line);
  if (names.empty()) fail(ErrorKind::invalid_argument, where + ": no columns requested");

  std::vector<std::size_t> columns;
  for (const auto& c : names) columns.push_back(find_column(header, c, where));

  std::vector<double> values;
  CsvColumns out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(ErrorKind::invalid_argument, where + ": row " + std::to_string(line_no) + " has " +
                                            std::to_string(fields.size()) + " fields, header has " +
                                            std::to_string(header.size()));
    }
    const std::size_t mark = values.size();
    bool missing = false;
    for (std::size_t c : columns) {
      const std::string& cell = fields[c];
      if (is_missing(cell)) {
        missing = true;
        break;
      }
      double v = 0.0;
      const char* first = cell.data() + (cell[0] == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(ErrorKind::invalid_argument, where + ": row " + std::to_string(line_no) + ", column '" + header[c] +
                                              "': non-numeric value '" + cell + "'");
      }
      values.push_back(v);
    }
    if (missing) {
      values.resize(mark);
      ++out.dropped_rows;
    }
  }
  const auto width = static_cast<Eigen::Index>(columns.size());
  const auto n = static_cast<Eigen::Index>(values.size()) / width;
  out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, width);
  return out;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (schema.x_cols.empty() || schema.s_cols.empty() || schema.y_col.empty()) {
    fail(ErrorKind::invalid_argument, path.string() + ": schema needs x columns, s columns and a y column");
  }
  std::vector<std::string> names = schema.x_cols;
  names.insert(names.end(), schema.s_cols.begin(), schema.s_cols.end());
  names.push_back(schema.y_col);
  const CsvColumns table = read_csv_columns(path, names);

  const auto p = static_cast<Eigen::Index>(schema.x_cols.size());
  const auto q = static_cast<Eigen::Index>(schema.s_cols.size());
  IngestResult out;
  out.dropped_rows = table.dropped_rows;
  Dataset& d = out.data;
  d.task = schema.task;
  d.x = table.values.leftCols(p);
  d.s = table.values.middleCols(p, q);
  d.y = table.values.rightCols(1);
  if (schema.task == Task::regression && d.y.rows() > 0) {
    out.y_mean = d.y.mean();
    d.y.array() -= out.y_mean;
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  std::string header;
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) header += "x_" + std::to_string(j) + ",";
  for (Eigen::Index j = 0; j < data.s.cols(); ++j) header += "s_" + std::to_string(j) + ",";
  out << header << "y\n";
  char buf[40];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    std::string row;
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) row += cell(data.x(i, j)) + ",";
    for (Eigen::Index j = 0; j < data.s.cols(); ++j) row += cell(data.s(i, j)) + ",";
    out << row << cell(data.y(i, 0)) << "\n";
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

Dataset load_scenario(const ScenarioConfig& scenario, std::uint64_t seed) {
  const std::uint64_t data_seed = CounterRng::derive(seed, 41);
  switch (scenario.kind) {
    case ScenarioKind::toy:
      return synthetic::gen_toy({.n = static_cast<std::size_t>(scenario.n), .seed = data_seed});
    case ScenarioKind::arctan:
      return synthetic::gen_planted_symmetric_bias(
          {.n = static_cast<std::size_t>(scenario.n), .seed = data_seed, .bias_scale = scenario.bias_scale});
    case ScenarioKind::csv:
      return ingest_csv(scenario.csv_path, scenario.schema).data;
  }
  fail(ErrorKind::config, "unknown scenario kind");
}

}  // namespace renyi::harness
