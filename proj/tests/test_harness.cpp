#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"

using namespace renyi;
using namespace renyi::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("renyi_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "cfg.yaml");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

const char* kSmallRun = R"(scenario: toy
lambdas: [0, 1]
seeds: [3, 4]
metrics: [hgr_kde, hgr_rdc, fairquant]
data:
  n: 500
train:
  epochs: 2
  batch_size: 100
  adversary: "FC:8 R, FC:1"
estimator:
  epochs: 2
)";

}  // namespace

TEST(Presets, ToyUnbiasedDefaults) {
  const ExperimentConfig cfg = preset("toy-unbiased");
  EXPECT_EQ(cfg.lambdas, std::vector<double>{13.0});
  EXPECT_EQ(cfg.train.epochs, 200);
  EXPECT_EQ(cfg.train.batch_size, 2048);
  EXPECT_EQ(cfg.scenario.kind, ScenarioKind::toy);
  EXPECT_EQ(cfg.train.encoder_arch, "FC:16 R, FC:8 R, FC:2");
  EXPECT_EQ(cfg.train.predictor_arch, "FC:16 R, FC:8 R, FC:4 R, FC:1 Sig");
  EXPECT_EQ(cfg.train.adversary_arch, "FC:64 R, FC:64 R, FC:1");
  EXPECT_EQ(preset("toy-biased").lambdas, std::vector<double>{0.0});
}

TEST(Presets, AllNamesResolveAndUnknownFails) {
  for (const auto& name : preset_names()) EXPECT_EQ(preset(name).preset, name);
  EXPECT_THROW(preset("mnist"), Error);
}

TEST(ParseConfig, PresetByName) {
  const ExperimentConfig cfg = parse_config_text("preset: toy-unbiased\n");
  EXPECT_EQ(cfg.lambdas, std::vector<double>{13.0});
  EXPECT_EQ(cfg.train.epochs, 200);
  EXPECT_EQ(cfg.train.batch_size, 2048);
  const ExperimentConfig over = parse_config_text("preset: toy-unbiased\nseeds: [7]\ntrain:\n  epochs: 5\n");
  EXPECT_EQ(over.seeds, std::vector<std::uint64_t>{7});
  EXPECT_EQ(over.train.epochs, 5);
  EXPECT_EQ(over.train.batch_size, 2048);
}

TEST(ParseConfig, EmptyFileListsRequiredKeys) {
  for (const char* text : {"", "\n\n", "{}"}) {
    const std::string msg = config_error(text);
    EXPECT_NE(msg.find("scenario"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lambdas"), std::string::npos) << msg;
    EXPECT_NE(msg.find("seeds"), std::string::npos) << msg;
  }
  const std::string partial = config_error("scenario: toy\n");
  EXPECT_NE(partial.find("missing lambdas, seeds"), std::string::npos) << partial;
}

TEST(ParseConfig, UnknownKeyReportsPathAndLine) {
  const std::string msg = config_error("scenario: toy\nlambdas: [1]\nseeds: [0]\ntrain:\n  epochs: 3\n  warmup: 2\n");
  EXPECT_NE(msg.find("cfg.yaml:6"), std::string::npos) << msg;
  EXPECT_NE(msg.find("train.warmup"), std::string::npos) << msg;
  EXPECT_NE(config_error("scenario: toy\nlambda: [1]\nseeds: [0]\n").find("cfg.yaml:2"), std::string::npos);
}

TEST(ParseConfig, TypeMismatchReportsPathAndLine) {
  const std::string msg = config_error("scenario: toy\nlambdas: [1]\nseeds: [0]\ntrain:\n  epochs: many\n");
  EXPECT_NE(msg.find("cfg.yaml:5"), std::string::npos) << msg;
  EXPECT_NE(msg.find("train.epochs"), std::string::npos) << msg;
  EXPECT_NE(config_error("scenario: toy\nlambdas: 1\nseeds: [0]\n").find("lambdas"), std::string::npos);
  EXPECT_NE(config_error("scenario: toy\nlambdas: [1]\nseeds: [-1]\n").find("seeds"), std::string::npos);
}

TEST(ParseConfig, SemanticErrors) {
  config_error("scenario: moon\nlambdas: [1]\nseeds: [0]\n");
  config_error("scenario: toy\nlambdas: []\nseeds: [0]\n");
  config_error("scenario: toy\nlambdas: [-1]\nseeds: [0]\n");
  config_error("scenario: toy\nlambdas: [1]\nseeds: []\n");
  config_error("scenario: toy\nlambdas: [1]\nseeds: [0]\nmetrics: [dcor]\n");
  config_error("scenario: toy\nlambdas: [1]\nseeds: [0]\nmode: adversarial\n");
  config_error("scenario: csv:/definitely/not/here.csv\nlambdas: [1]\nseeds: [0]\n");
  config_error("scenario: toy\nlambdas: [1\nseeds: [0]\n");
}

TEST(ParseConfig, RoundTripsThroughSerialization) {
  const fs::path dir = scratch_dir("roundtrip");
  const fs::path csv = write_file(dir / "d.csv", "a,b,y\n1,2,3\n");
  const std::vector<std::string> texts = {
      kSmallRun,
      "preset: toy-biased\noutput_dir: somewhere\n",
      "preset: arctan-contrast\nmode: simple_adversary\n",
      "preset: crime\nscenario: csv:" + csv.string() + "\ndata:\n  x_cols: [a]\n  s_cols: [b]\n  y_col: y\n",
  };
  for (const auto& text : texts) {
    const ExperimentConfig a = parse_config_text(text);
    const ExperimentConfig b = parse_config_text(serialize_config(a));
    EXPECT_TRUE(a == b) << serialize_config(a);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_EQ(serialize_config(a), serialize_config(b));
  }
}

TEST(ParseConfig, FingerprintTracksSemanticFields) {
  const ExperimentConfig base = parse_config_text(kSmallRun);
  std::set<std::uint64_t> seen = {base.fingerprint()};
  auto variant = [&](auto mutate) {
    ExperimentConfig c = base;
    mutate(c);
    EXPECT_TRUE(seen.insert(c.fingerprint()).second) << c.canonical();
  };
  variant([](ExperimentConfig& c) { c.lambdas.push_back(2.0); });
  variant([](ExperimentConfig& c) { c.seeds = {3}; });
  variant([](ExperimentConfig& c) { c.train.lr_f *= 2.0; });
  variant([](ExperimentConfig& c) { c.train.mode = fair::Mode::hgr_prediction; });
  variant([](ExperimentConfig& c) { c.scenario.n = 501; });
  variant([](ExperimentConfig& c) { c.estimator.seed = 1; });
  variant([](ExperimentConfig& c) { c.train.encoder_arch = "FC:16 R, FC:2"; });
  variant([](ExperimentConfig& c) { c.metrics.push_back("mine"); });
  variant([](ExperimentConfig& c) { c.kde_bins = 16; });
  for (const auto& name : preset_names()) variant([&](ExperimentConfig& c) { c = preset(name); });

  ExperimentConfig moved = base;
  moved.output_dir = "elsewhere";
  EXPECT_EQ(moved.fingerprint(), base.fingerprint());
  ExperimentConfig reordered = base;
  std::reverse(reordered.metrics.begin(), reordered.metrics.end());
  EXPECT_EQ(reordered.fingerprint(), base.fingerprint());
}

TEST(Ingest, ExactSmallFile) {
  const fs::path dir = scratch_dir("ingest_exact");
  const fs::path csv = write_file(dir / "d.csv", "id,age,sex,label\n1,30,0,1\n2,45.5,1,0\n3,-2e1,1,1\n");
  const IngestResult r = ingest_csv(csv, {.x_cols = {"age", "id"}, .s_cols = {"sex"}, .y_col = "label"});
  SampleMatrix x(3, 2), s(3, 1), y(3, 1);
  x << 30, 1, 45.5, 2, -20, 3;
  s << 0, 1, 1;
  y << 1, 0, 1;
  EXPECT_EQ(r.data.x, x);
  EXPECT_EQ(r.data.s, s);
  EXPECT_EQ(r.data.y, y);
  EXPECT_EQ(r.dropped_rows, 0u);
  EXPECT_EQ(r.data.task, Task::binary);
}

TEST(Ingest, BlankCellDropsRow) {
  const fs::path dir = scratch_dir("ingest_blank");
  const fs::path csv = write_file(dir / "d.csv", "a,s,y\n1,2,3\n4,,6\n7,8,9\n");
  const IngestResult r = ingest_csv(csv, {.x_cols = {"a"}, .s_cols = {"s"}, .y_col = "y"});
  EXPECT_EQ(r.data.rows(), 2u);
  EXPECT_EQ(r.dropped_rows, 1u);
  EXPECT_EQ(r.data.x(1, 0), 7.0);
}

TEST(Ingest, RegressionTargetIsMeanNormalized) {
  const fs::path dir = scratch_dir("ingest_regression");
  const fs::path csv = write_file(dir / "d.csv", "a,s,y\n1,0,10.3\n2,1,-4\n3,0,7.77\n4,1,0.1\n");
  const IngestResult r =
      ingest_csv(csv, {.x_cols = {"a"}, .s_cols = {"s"}, .y_col = "y", .task = Task::regression});
  EXPECT_NEAR(r.data.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(r.y_mean, (10.3 - 4 + 7.77 + 0.1) / 4, 1e-12);
}

TEST(Ingest, Errors) {
  const fs::path dir = scratch_dir("ingest_errors");
  const fs::path csv = write_file(dir / "d.csv", "a,s,y\n1,2,3\n4,five,6\n");
  try {
    ingest_csv(csv, {.x_cols = {"a"}, .s_cols = {"s"}, .y_col = "y"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("five"), std::string::npos) << e.what();
  }
  try {
    ingest_csv(csv, {.x_cols = {"b"}, .s_cols = {"s"}, .y_col = "y"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ingest_csv(dir / "missing.csv", {.x_cols = {"a"}, .s_cols = {"s"}, .y_col = "y"}), Error);
}

TEST(Ingest, WriteCsvRoundTrips) {
  const fs::path dir = scratch_dir("ingest_write");
  const Dataset d = load_scenario({.kind = ScenarioKind::toy, .n = 50}, 3);
  write_csv(dir / "toy.csv", d);
  EXPECT_EQ(read_file(dir / "toy.csv").substr(0, 14), "x_0,x_1,s_0,y\n");
  const IngestResult r = ingest_csv(dir / "toy.csv", {.x_cols = {"x_0", "x_1"}, .s_cols = {"s_0"}, .y_col = "y"});
  EXPECT_EQ(r.data.x, d.x);
  EXPECT_EQ(r.data.s, d.s);
  EXPECT_EQ(r.data.y, d.y);
}

TEST(RunExperiment, GridProducesRecordsAndAggregates) {
  const ExperimentConfig cfg = parse_config_text(kSmallRun);
  const std::vector<RunRecord> records = run_experiment(cfg);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].lambda, 0.0);
  EXPECT_EQ(records[1].lambda, 0.0);
  EXPECT_EQ(records[2].lambda, 1.0);
  EXPECT_EQ(records[0].seed, 3u);
  EXPECT_EQ(records[1].seed, 4u);
  for (const auto& r : records) {
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.fingerprint, cfg.fingerprint());
    EXPECT_TRUE(std::isnan(r.result.final.hgr_nn_z));
    EXPECT_FALSE(std::isnan(r.result.final.fairquant));
    EXPECT_EQ(r.result.epochs.size(), 2u);
  }
  const std::vector<AggregateRow> agg = aggregate(records);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].runs, 2);
  EXPECT_EQ(agg[0].succeeded, 2);
}

TEST(RunExperiment, FailedRunsAreRecordedAndExcluded) {
  ExperimentConfig cfg = parse_config_text(kSmallRun);
  cfg.train.batch_size = 450;
  const std::vector<RunRecord> records = run_experiment(cfg);
  ASSERT_EQ(records.size(), 4u);
  for (const auto& r : records) {
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.error.find("batch_size"), std::string::npos) << r.error;
  }
  const auto agg = aggregate(records);
  EXPECT_EQ(agg[0].succeeded, 0);
  EXPECT_TRUE(std::isnan(agg[0].mean.front().second));
}

TEST(EmitReports, DeterministicBytesAndSchema) {
  const ExperimentConfig cfg = parse_config_text(kSmallRun);
  const fs::path a = scratch_dir("emit_a"), b = scratch_dir("emit_b");
  emit_reports(run_experiment(cfg), cfg, a);
  emit_reports(run_experiment(cfg), cfg, b);
  for (const char* name : {"runs.csv", "summary.json", "config.yaml", "epochs_run_000.csv"}) {
    EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
  }
  EXPECT_TRUE(fs::exists(a / "timing.csv"));
  const std::string runs = read_file(a / "runs.csv");
  EXPECT_EQ(runs.substr(0, runs.find('\n')),
            "run_id,lambda,seed,status,fingerprint,version,accuracy,mse,hgr_nn_z,hgr_nn_yhat,hgr_kde,hgr_rdc,mine,"
            "fairquant,error");
  EXPECT_EQ(std::count(runs.begin(), runs.end(), '\n'), 5);
  EXPECT_EQ(runs.find('\r'), std::string::npos);

  const auto summary = nlohmann::json::parse(read_file(a / "summary.json"));
  for (const auto& name : fair::FinalMetrics::names()) {
    EXPECT_TRUE(summary["aggregates"][0]["mean"].contains(name)) << name;
  }
  EXPECT_EQ(summary["aggregates"].size(), 2u);
  EXPECT_EQ(summary["fingerprint"], hex64(cfg.fingerprint()));
  EXPECT_EQ(parse_config(a / "config.yaml"), parse_config_text(kSmallRun));
}

TEST(EmitReports, ZeroRecordsGiveHeaderOnlyCsv) {
  const ExperimentConfig cfg = parse_config_text(kSmallRun);
  const fs::path dir = scratch_dir("emit_empty");
  emit_reports({}, cfg, dir);
  const std::string runs = read_file(dir / "runs.csv");
  EXPECT_EQ(std::count(runs.begin(), runs.end(), '\n'), 1);
  EXPECT_EQ(runs.rfind("run_id,", 0), 0u);
}

TEST(EmitReports, UnwritableDirectoryNamesPath) {
  const fs::path dir = scratch_dir("emit_blocked");
  write_file(dir / "file", "x");
  try {
    emit_reports({}, parse_config_text(kSmallRun), dir / "file" / "sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("file"), std::string::npos) << e.what();
  }
}

TEST(FormatNumber, SixSignificantDigits) {
  EXPECT_EQ(format_number(0.123456789), "0.123457");
  EXPECT_EQ(format_number(1234567.0), "1.23457e+06");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Workers, EnvironmentCapsPool) {
  setenv("RENYI_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("RENYI_THREADS", "0", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("RENYI_THREADS");
  EXPECT_FALSE(version_string().empty());
}
