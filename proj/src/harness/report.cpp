#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"

namespace renyi::harness {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

double printed(double v) { return std::isnan(v) ? v : std::strtod(format_number(v).c_str(), nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  std::vector<AggregateRow> rows;
  for (const RunRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& a) { return a.lambda == r.lambda; });
    if (it == rows.end()) {
      AggregateRow fresh;
      fresh.lambda = r.lambda;
      rows.push_back(std::move(fresh));
      it = rows.end() - 1;
    }
    ++it->runs;
    if (r.ok) ++it->succeeded;
  }
  for (AggregateRow& row : rows) {
    for (const std::string& name : fair::FinalMetrics::names()) {
      std::vector<double> values;
      for (const RunRecord& r : records) {
        if (!r.ok || r.lambda != row.lambda) continue;
        for (const auto& [key, v] : r.result.final.named()) {
          if (key == name && !std::isnan(v)) values.push_back(printed(v));
        }
      }
      double mean = fair::FinalMetrics::kMissing, sd = fair::FinalMetrics::kMissing;
      if (!values.empty()) {
        mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
      }
      if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
      }
      row.mean.emplace_back(name, mean);
      row.std.emplace_back(name, sd);
    }
  }
  return rows;
}

void emit_reports(const std::vector<RunRecord>& records, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  std::string runs = "run_id,lambda,seed,status,fingerprint,version";
  for (const auto& name : fair::FinalMetrics::names()) runs += "," + name;
  runs += ",error\n";
  std::string timing = "run_id,runtime_seconds\n";
  for (const RunRecord& r : records) {
    runs += r.run_id + "," + format_number(r.lambda) + "," + std::to_string(r.seed) + "," +
            (r.ok ? "ok" : "failed") + "," + hex64(r.fingerprint) + "," + csv_field(r.version);
    for (const auto& [name, v] : r.result.final.named()) runs += "," + format_number(v);
    runs += "," + csv_field(r.error) + "\n";
    timing += r.run_id + "," + format_number(r.runtime_seconds) + "\n";

    std::string epochs = "epoch,predictor_loss,task_metric,adversary_objective\n";
    for (const fair::EpochRow& e : r.result.epochs) {
      epochs += std::to_string(e.epoch) + "," + format_number(e.predictor_loss) + "," +
                format_number(e.task_metric) + "," + format_number(e.adversary_objective) + "\n";
    }
    write_file(dir / ("epochs_" + r.run_id + ".csv"), epochs);
  }
  write_file(dir / "runs.csv", runs);
  write_file(dir / "timing.csv", timing);
  write_file(dir / "config.yaml", serialize_config(cfg));

  nlohmann::ordered_json summary;
  summary["fingerprint"] = hex64(cfg.fingerprint());
  summary["version"] = version_string();
  summary["preset"] = cfg.preset;
  summary["mode"] = fair::to_string(cfg.train.mode);
  summary["metrics"] = fair::FinalMetrics::names();
  summary["runs"] = records.size();
  nlohmann::ordered_json aggregates = nlohmann::ordered_json::array();
  for (const AggregateRow& row : aggregate(records)) {
    nlohmann::ordered_json a;
    a["lambda"] = row.lambda;
    a["runs"] = row.runs;
    a["succeeded"] = row.succeeded;
    nlohmann::ordered_json mean, sd;
    for (const auto& [name, v] : row.mean) mean[name] = number_or_null(v);
    for (const auto& [name, v] : row.std) sd[name] = number_or_null(v);
    a["mean"] = std::move(mean);
    a["std"] = std::move(sd);
    aggregates.push_back(std::move(a));
  }
  summary["aggregates"] = std::move(aggregates);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace renyi::harness
