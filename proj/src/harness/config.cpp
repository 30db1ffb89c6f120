#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"

namespace renyi::harness {

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string task_name(Task t) {
  switch (t) {
    case Task::binary: return "binary";
    case Task::regression: return "regression";
    case Task::multiclass: return "multiclass";
  }
  return "?";
}

Task parse_task(const std::string& text) {
  for (Task t : {Task::binary, Task::regression, Task::multiclass}) {
    if (text == task_name(t)) return t;
  }
  fail(ErrorKind::config, "unknown task '" + text + "' (binary, regression, multiclass)");
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> kNames = {"hgr_nn_z", "hgr_nn_yhat", "hgr_kde",
                                                  "hgr_rdc",  "mine",        "fairquant"};
  return kNames;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// Strict YAML reader: every lookup is recorded, and keys never looked up are
// reported as unknown.
class Reader {
 public:
  Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void error(const YAML::Node& node, const std::string& path, const std::string& what) const {
    std::string where = origin_;
    if (node.IsDefined() && !node.Mark().is_null()) where += ":" + std::to_string(node.Mark().line + 1);
    fail(ErrorKind::config, where + ": " + (path.empty() ? "" : "key '" + path + "' ") + what);
  }

  void expect_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) error(node, path, "must be a mapping");
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& path, const char* type) const {
    if (!node.IsScalar()) error(node, path, std::string("expects ") + type);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      error(node, path, std::string("expects ") + type + ", got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& n, const std::string& p) const { return scalar<double>(n, p, "a number"); }
  int integer(const YAML::Node& n, const std::string& p) const { return scalar<int>(n, p, "an integer"); }
  std::uint64_t unsigned_integer(const YAML::Node& n, const std::string& p) const {
    return scalar<std::uint64_t>(n, p, "a non-negative integer");
  }
  std::string text(const YAML::Node& n, const std::string& p) const { return scalar<std::string>(n, p, "a string"); }

  template <typename F>
  auto list(const YAML::Node& node, const std::string& path, F item) const {
    if (!node.IsSequence()) error(node, path, "expects a list");
    std::vector<decltype(item(node, path))> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(item(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  // Visits each key of a mapping; unknown keys fail with their path and line.
  template <typename F>
  void fields(const YAML::Node& map, const std::string& prefix, const std::set<std::string>& known, F visit) const {
    expect_map(map, prefix);
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (!known.count(key)) error(kv.first, "", "unknown key '" + path + "'");
      visit(key, kv.second, path);
    }
  }

 private:
  std::string origin_;
};

void apply_data(const Reader& r, const YAML::Node& node, ScenarioConfig& sc) {
  r.fields(node, "data", {"n", "bias_scale", "test_fraction", "x_cols", "s_cols", "y_col", "task"},
           [&](const std::string& key, const YAML::Node& v, const std::string& path) {
             auto str = [&](const YAML::Node& n, const std::string& p) { return r.text(n, p); };
             if (key == "n") sc.n = r.integer(v, path);
             else if (key == "bias_scale") sc.bias_scale = r.number(v, path);
             else if (key == "test_fraction") sc.test_fraction = r.number(v, path);
             else if (key == "x_cols") sc.schema.x_cols = r.list(v, path, str);
             else if (key == "s_cols") sc.schema.s_cols = r.list(v, path, str);
             else if (key == "y_col") sc.schema.y_col = r.text(v, path);
             else if (key == "task") sc.schema.task = parse_task(r.text(v, path));
           });
}

void apply_train(const Reader& r, const YAML::Node& node, fair::FairTrainConfig& t) {
  r.fields(node, "train",
           {"epochs", "batch_size", "loss", "lr_f", "lr_g", "lr_phi", "lr_psi", "epsilon", "adversary_seed",
            "encoder", "predictor", "adversary"},
           [&](const std::string& key, const YAML::Node& v, const std::string& path) {
             if (key == "epochs") t.epochs = r.integer(v, path);
             else if (key == "batch_size") t.batch_size = r.integer(v, path);
             else if (key == "loss") t.loss = fair::parse_loss(r.text(v, path));
             else if (key == "lr_f") t.lr_f = r.number(v, path);
             else if (key == "lr_g") t.lr_g = r.number(v, path);
             else if (key == "lr_phi") t.lr_phi = r.number(v, path);
             else if (key == "lr_psi") t.lr_psi = r.number(v, path);
             else if (key == "epsilon") t.epsilon = r.number(v, path);
             else if (key == "adversary_seed") t.adversary_seed = r.unsigned_integer(v, path);
             else if (key == "encoder") t.encoder_arch = r.text(v, path);
             else if (key == "predictor") t.predictor_arch = r.text(v, path);
             else if (key == "adversary") t.adversary_arch = r.text(v, path);
           });
}

void apply_estimator(const Reader& r, const YAML::Node& node, ExperimentConfig& cfg) {
  metrics::HgrNnConfig& e = cfg.estimator;
  r.fields(node, "estimator",
           {"f_arch", "g_arch", "epochs", "batch_size", "lr_f", "lr_g", "seed", "epsilon", "kde_bins",
            "fairquant_quantiles"},
           [&](const std::string& key, const YAML::Node& v, const std::string& path) {
             if (key == "f_arch") e.f_arch = r.text(v, path);
             else if (key == "g_arch") e.g_arch = r.text(v, path);
             else if (key == "epochs") e.epochs = r.integer(v, path);
             else if (key == "batch_size") e.batch_size = r.integer(v, path);
             else if (key == "lr_f") e.lr_f = r.number(v, path);
             else if (key == "lr_g") e.lr_g = r.number(v, path);
             else if (key == "seed") e.seed = r.unsigned_integer(v, path);
             else if (key == "epsilon") e.epsilon = r.number(v, path);
             else if (key == "kde_bins") cfg.kde_bins = r.integer(v, path);
             else if (key == "fairquant_quantiles") cfg.fairquant_quantiles = r.integer(v, path);
           });
}

void parse_scenario(const std::string& text, ScenarioConfig& sc) {
  if (text == "toy") {
    sc.kind = ScenarioKind::toy;
  } else if (text == "arctan") {
    sc.kind = ScenarioKind::arctan;
  } else if (text.rfind("csv:", 0) == 0 && text.size() > 4) {
    sc.kind = ScenarioKind::csv;
    sc.csv_path = text.substr(4);
  } else {
    fail(ErrorKind::config, "unknown scenario '" + text + "' (toy, arctan, csv:<path>)");
  }
}

std::string scenario_text(const ScenarioConfig& sc) {
  switch (sc.kind) {
    case ScenarioKind::toy: return "toy";
    case ScenarioKind::arctan: return "arctan";
    case ScenarioKind::csv: return "csv:" + sc.csv_path;
  }
  return "?";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <typename T, typename F>
std::string flow(const std::vector<T>& items, F fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + fmt(items[i]);
  return out + "]";
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {"toy-biased", "toy-unbiased", "arctan-contrast", "us-census",
                                                  "motor",      "crime",        "compas",          "default-credit"};
  return kNames;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.metrics = metric_names();
  cfg.seeds = {0, 1, 2, 3, 4};
  fair::FairTrainConfig& t = cfg.train;

  auto real_world = [&](double lambda, int epochs, int batch, const std::string& predictor,
                        const std::string& adversary, Task task) {
    cfg.scenario.kind = ScenarioKind::csv;
    cfg.scenario.schema.task = task;
    cfg.lambdas = {lambda};
    t.epochs = epochs;
    t.batch_size = batch;
    t.encoder_arch = "FC:128 R, FC:64 R, FC:64";
    t.predictor_arch = predictor;
    t.adversary_arch = adversary;
    t.loss = task == Task::binary ? fair::Loss::binary_cross_entropy : fair::Loss::mse;
  };

  if (name == "toy-biased" || name == "toy-unbiased") {
    cfg.scenario.kind = ScenarioKind::toy;
    cfg.lambdas = {name == "toy-biased" ? 0.0 : 13.0};
    t.epochs = 200;
    t.batch_size = 2048;
    t.loss = fair::Loss::binary_cross_entropy;
    t.lr_f = t.lr_g = 1e-2;
    t.lr_psi = 1e-4;
    t.lr_phi = 1e-3;
  } else if (name == "arctan-contrast") {
    cfg.scenario.kind = ScenarioKind::arctan;
    cfg.scenario.n = 10000;
    cfg.lambdas = {13.0};
    t.mode = fair::Mode::hgr_prediction;
    t.loss = fair::Loss::mse;
    t.epochs = 120;
    t.batch_size = 512;
    t.predictor_arch = "FC:16 R, FC:8 R, FC:4 R, FC:1";
  } else if (name == "us-census") {
    real_world(20, 150, 2048, "FC:128 R, FC:64 R, FC:16 R, FC:1", "FC:64 R, FC:64 R, FC:1", Task::regression);
  } else if (name == "motor") {
    real_world(1.5, 1000, 2048, "FC:128 R, FC:64 T, FC:16 R, FC:1", "FC:64 R, FC:64 T, FC:1", Task::regression);
  } else if (name == "crime") {
    real_world(3, 3000, 512, "FC:128 R, FC:64 T, FC:16 R, FC:1", "FC:64 R, FC:64 T, FC:1", Task::regression);
  } else if (name == "compas") {
    real_world(200, 850, 2048, "FC:128 R, FC:64 R, FC:16 R, FC:1 Sig", "FC:64 R, FC:64 R, FC:1", Task::binary);
  } else if (name == "default-credit") {
    real_world(100, 400, 2048, "FC:128 R, FC:64 R, FC:16 R, FC:1 Sig", "FC:64 R, FC:64 R, FC:1", Task::binary);
  } else {
    fail(ErrorKind::config, "unknown preset '" + name + "' (known: " + join(preset_names()) + ")");
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::config, origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const std::string required = "required keys: scenario, lambdas, seeds (or preset)";
  if (!root.IsDefined() || root.IsNull() || (root.IsMap() && root.size() == 0)) {
    fail(ErrorKind::config, origin + ": empty config; " + required);
  }
  const YAML::Node& doc = root;
  Reader r(origin);
  r.expect_map(doc, "");

  ExperimentConfig cfg;
  if (const YAML::Node p = doc["preset"]; p) cfg = preset(r.text(p, "preset"));
  bool has_scenario = !cfg.preset.empty(), has_lambdas = !cfg.preset.empty(), has_seeds = !cfg.preset.empty();

  r.fields(doc, "",
           {"preset", "scenario", "mode", "lambdas", "seeds", "metrics", "output_dir", "data", "train", "estimator"},
           [&](const std::string& key, const YAML::Node& v, const std::string& path) {
             if (key == "scenario") {
               parse_scenario(r.text(v, path), cfg.scenario);
               has_scenario = true;
             } else if (key == "mode") {
               cfg.train.mode = fair::parse_mode(r.text(v, path));
             } else if (key == "lambdas") {
               cfg.lambdas = r.list(v, path, [&](const YAML::Node& n, const std::string& p) { return r.number(n, p); });
               has_lambdas = true;
             } else if (key == "seeds") {
               cfg.seeds = r.list(v, path, [&](const YAML::Node& n, const std::string& p) {
                 return r.unsigned_integer(n, p);
               });
               has_seeds = true;
             } else if (key == "metrics") {
               cfg.metrics = r.list(v, path, [&](const YAML::Node& n, const std::string& p) { return r.text(n, p); });
             } else if (key == "output_dir") {
               cfg.output_dir = r.text(v, path);
             } else if (key == "data") {
               apply_data(r, v, cfg.scenario);
             } else if (key == "train") {
               apply_train(r, v, cfg.train);
             } else if (key == "estimator") {
               apply_estimator(r, v, cfg);
             }
           });
  if (cfg.metrics.empty() && !doc["metrics"]) cfg.metrics = metric_names();

  std::vector<std::string> missing;
  if (!has_scenario) missing.push_back("scenario");
  if (!has_lambdas) missing.push_back("lambdas");
  if (!has_seeds) missing.push_back("seeds");
  if (!missing.empty()) fail(ErrorKind::config, origin + ": missing " + join(missing) + "; " + required);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) fail(ErrorKind::config, "seeds must list at least one seed");
  if (lambdas.empty()) fail(ErrorKind::config, "lambdas must list at least one value");
  for (double l : lambdas) {
    if (!(l >= 0.0)) fail(ErrorKind::config, "lambdas must be >= 0");
  }
  for (const auto& m : metrics) {
    bool known = m == "accuracy" || m == "mse";
    for (const auto& k : metric_names()) known = known || m == k;
    if (!known) fail(ErrorKind::config, "unknown metric '" + m + "' (known: " + join(metric_names()) + ")");
  }
  if (!(scenario.test_fraction > 0.0 && scenario.test_fraction < 1.0)) {
    fail(ErrorKind::config, "data.test_fraction must lie in (0, 1)");
  }
  if (scenario.kind == ScenarioKind::csv) {
    if (scenario.csv_path.empty()) fail(ErrorKind::config, "csv scenario needs a path (scenario: csv:<path>)");
    if (!std::filesystem::exists(scenario.csv_path)) {
      fail(ErrorKind::config, "csv file not found: " + scenario.csv_path);
    }
    if (scenario.schema.x_cols.empty() || scenario.schema.s_cols.empty() || scenario.schema.y_col.empty()) {
      fail(ErrorKind::config, "csv scenario needs data.x_cols, data.s_cols and data.y_col");
    }
  } else if (scenario.n < 2) {
    fail(ErrorKind::config, "data.n must be >= 2");
  }
  if (kde_bins < 4) fail(ErrorKind::config, "estimator.kde_bins must be >= 4");
  if (fairquant_quantiles < 1) fail(ErrorKind::config, "estimator.fairquant_quantiles must be >= 1");
  train.validate();
  estimator.validate();
  for (const std::string* arch : {&train.encoder_arch, &train.predictor_arch, &train.adversary_arch}) {
    nn::parse_architecture(*arch);
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "scenario=" << scenario_text(scenario) << "\n";
  if (scenario.kind == ScenarioKind::csv) {
    o << "x_cols=" << join(scenario.schema.x_cols) << "\ns_cols=" << join(scenario.schema.s_cols)
      << "\ny_col=" << scenario.schema.y_col << "\ntask=" << task_name(scenario.schema.task) << "\n";
  } else {
    o << "n=" << scenario.n << "\n";
    if (scenario.kind == ScenarioKind::arctan) o << "bias_scale=" << exact(scenario.bias_scale) << "\n";
  }
  o << "test_fraction=" << exact(scenario.test_fraction) << "\n";
  o << "mode=" << fair::to_string(train.mode) << "\nloss=" << fair::to_string(train.loss) << "\n";
  o << "epochs=" << train.epochs << "\nbatch_size=" << train.batch_size << "\n";
  o << "lr=" << exact(train.lr_f) << "," << exact(train.lr_g) << "," << exact(train.lr_phi) << ","
    << exact(train.lr_psi) << "\n";
  o << "epsilon=" << exact(train.epsilon) << "\n";
  o << "adversary_seed=" << (train.adversary_seed ? std::to_string(*train.adversary_seed) : "run") << "\n";
  o << "encoder=" << nn::format_architecture(nn::parse_architecture(train.encoder_arch)) << "\n";
  o << "predictor=" << nn::format_architecture(nn::parse_architecture(train.predictor_arch)) << "\n";
  o << "adversary=" << nn::format_architecture(nn::parse_architecture(train.adversary_arch)) << "\n";
  o << "lambdas=" << flow(lambdas, exact) << "\n";
  o << "seeds=" << flow(seeds, [](std::uint64_t s) { return std::to_string(s); }) << "\n";
  std::set<std::string> sorted_metrics(metrics.begin(), metrics.end());
  o << "metrics=" << join({sorted_metrics.begin(), sorted_metrics.end()}) << "\n";
  o << "estimator=" << estimator.canonical() << "\n";
  o << "kde_bins=" << kde_bins << "\nfairquant_quantiles=" << fairquant_quantiles << "\n";
  return o.str();
}

std::uint64_t ExperimentConfig::fingerprint() const { return fnv1a(canonical()); }

fair::EvalOptions ExperimentConfig::eval_options() const {
  fair::EvalOptions ev;
  auto wants = [&](const char* name) {
    for (const auto& m : metrics) {
      if (m == name) return true;
    }
    return false;
  };
  ev.hgr_nn_z = wants("hgr_nn_z");
  ev.hgr_nn_yhat = wants("hgr_nn_yhat");
  ev.hgr_kde = wants("hgr_kde");
  ev.hgr_rdc = wants("hgr_rdc");
  ev.mine = wants("mine");
  ev.fairquant = wants("fairquant");
  ev.estimator = estimator;
  ev.kde_bins = kde_bins;
  ev.fairquant_quantiles = fairquant_quantiles;
  return ev;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  auto str = [](const std::string& s) { return quoted(s); };
  if (!cfg.preset.empty()) o << "preset: " << quoted(cfg.preset) << "\n";
  o << "scenario: " << quoted(scenario_text(cfg.scenario)) << "\n";
  o << "mode: " << fair::to_string(cfg.train.mode) << "\n";
  o << "lambdas: " << flow(cfg.lambdas, exact) << "\n";
  o << "seeds: " << flow(cfg.seeds, [](std::uint64_t s) { return std::to_string(s); }) << "\n";
  o << "metrics: " << flow(cfg.metrics, str) << "\n";
  o << "output_dir: " << quoted(cfg.output_dir) << "\n";
  const ScenarioConfig& sc = cfg.scenario;
  o << "data:\n  n: " << sc.n << "\n  bias_scale: " << exact(sc.bias_scale)
    << "\n  test_fraction: " << exact(sc.test_fraction) << "\n  task: " << task_name(sc.schema.task) << "\n";
  if (!sc.schema.x_cols.empty()) o << "  x_cols: " << flow(sc.schema.x_cols, str) << "\n";
  if (!sc.schema.s_cols.empty()) o << "  s_cols: " << flow(sc.schema.s_cols, str) << "\n";
  if (!sc.schema.y_col.empty()) o << "  y_col: " << quoted(sc.schema.y_col) << "\n";
  const fair::FairTrainConfig& t = cfg.train;
  o << "train:\n  epochs: " << t.epochs << "\n  batch_size: " << t.batch_size
    << "\n  loss: " << fair::to_string(t.loss) << "\n  lr_f: " << exact(t.lr_f) << "\n  lr_g: " << exact(t.lr_g)
    << "\n  lr_phi: " << exact(t.lr_phi) << "\n  lr_psi: " << exact(t.lr_psi)
    << "\n  epsilon: " << exact(t.epsilon) << "\n";
  if (t.adversary_seed) o << "  adversary_seed: " << *t.adversary_seed << "\n";
  o << "  encoder: " << quoted(t.encoder_arch) << "\n  predictor: " << quoted(t.predictor_arch)
    << "\n  adversary: " << quoted(t.adversary_arch) << "\n";
  const metrics::HgrNnConfig& e = cfg.estimator;
  o << "estimator:\n  f_arch: " << quoted(e.f_arch) << "\n  g_arch: " << quoted(e.g_arch)
    << "\n  epochs: " << e.epochs << "\n  batch_size: " << e.batch_size << "\n  lr_f: " << exact(e.lr_f)
    << "\n  lr_g: " << exact(e.lr_g) << "\n  seed: " << e.seed << "\n  epsilon: " << exact(e.epsilon)
    << "\n  kde_bins: " << cfg.kde_bins << "\n  fairquant_quantiles: " << cfg.fairquant_quantiles << "\n";
  return o.str();
}

}  // namespace renyi::harness
