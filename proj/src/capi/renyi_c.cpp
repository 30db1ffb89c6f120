#include "renyi/renyi.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <string>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"
#include "renyi/metrics.hpp"
#include "renyi/synthetic.hpp"

struct renyi_config {
  renyi::harness::ExperimentConfig value;
};

struct renyi_records {
  std::vector<renyi::harness::RunRecord> value;
};

namespace {

thread_local std::string last_error;

renyi_status status_of(renyi::ErrorKind kind) {
  switch (kind) {
    case renyi::ErrorKind::config: return RENYI_ERR_CONFIG;
    case renyi::ErrorKind::run: return RENYI_ERR_RUN;
    case renyi::ErrorKind::invalid_argument: return RENYI_ERR_INVALID_ARGUMENT;
    case renyi::ErrorKind::shape: return RENYI_ERR_SHAPE;
    case renyi::ErrorKind::numeric: return RENYI_ERR_NUMERIC;
    case renyi::ErrorKind::io: return RENYI_ERR_IO;
  }
  return RENYI_ERR_INTERNAL;
}

template <typename F>
renyi_status guarded(F body) {
  try {
    body();
    return RENYI_OK;
  } catch (const renyi::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RENYI_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RENYI_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) renyi::fail(renyi::ErrorKind::invalid_argument, what);
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  std::string item;
  for (const char* p = text;; ++p) {
    if (*p == ',' || *p == '\0') {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
      item.clear();
      if (*p == '\0') break;
    } else {
      item += *p;
    }
  }
  return out;
}

renyi::metrics::HgrReport measure(const renyi::SampleMatrix& u, const renyi::SampleMatrix& v,
                                  const std::string& name, std::uint64_t seed) {
  using namespace renyi::metrics;
  const Estimator est = parse_estimator(name);
  HgrNnConfig cfg;
  cfg.seed = seed;
  cfg.batch_size = std::min<int>(cfg.batch_size, static_cast<int>(u.rows()));
  auto one_column = [&](const char* what) {
    if (u.cols() != 1 || v.cols() != 1) {
      renyi::fail(renyi::ErrorKind::invalid_argument, std::string(what) + " needs exactly one u and one v column");
    }
  };
  switch (est) {
    case Estimator::nn: return hgr_nn(u, v, cfg);
    case Estimator::kde:
      one_column("kde");
      return hgr_kde(renyi::column(u), renyi::column(v));
    case Estimator::rdc: return hgr_rdc(u, v, 20, 1.0 / 6.0, seed);
    case Estimator::mine_mi: return mine_mi(u, v, cfg);
    case Estimator::pearson_abs: {
      one_column("pearson");
      HgrReport r;
      r.estimator = est;
      r.n = static_cast<std::size_t>(u.rows());
      r.raw_estimate = pearson(renyi::column(u), renyi::column(v));
      r.estimate = std::abs(r.raw_estimate);
      return r;
    }
  }
  renyi::fail(renyi::ErrorKind::invalid_argument, "unknown estimator");
}

void fill(const renyi::metrics::HgrReport& r, renyi_estimate_result* out) {
  out->estimate = r.estimate;
  out->raw_estimate = r.raw_estimate;
  out->n = r.n;
  out->degenerate = r.degenerate ? 1 : 0;
  out->bins_merged = r.bins_merged ? 1 : 0;
  out->ridge_added = r.ridge_added ? 1 : 0;
}

}  // namespace

extern "C" {

const char* renyi_version(void) {
  static const std::string version = renyi::harness::version_string();
  return version.c_str();
}

const char* renyi_last_error(void) { return last_error.c_str(); }

const char* renyi_status_name(renyi_status status) {
  switch (status) {
    case RENYI_OK: return "ok";
    case RENYI_ERR_CONFIG: return "config error";
    case RENYI_ERR_RUN: return "run failure";
    case RENYI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RENYI_ERR_SHAPE: return "shape mismatch";
    case RENYI_ERR_NUMERIC: return "numeric failure";
    case RENYI_ERR_IO: return "i/o error";
    case RENYI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

renyi_status renyi_config_load(const char* path, renyi_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "renyi_config_load: null argument");
    *out = new renyi_config{renyi::harness::parse_config(path)};
  });
}

renyi_status renyi_config_parse(const char* yaml_text, renyi_config** out) {
  return guarded([&] {
    require(yaml_text != nullptr && out != nullptr, "renyi_config_parse: null argument");
    *out = new renyi_config{renyi::harness::parse_config_text(yaml_text)};
  });
}

renyi_status renyi_config_preset(const char* name, renyi_config** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "renyi_config_preset: null argument");
    *out = new renyi_config{renyi::harness::preset(name)};
  });
}

void renyi_config_free(renyi_config* cfg) { delete cfg; }

renyi_status renyi_config_set_seeds(renyi_config* cfg, const uint64_t* seeds, size_t count) {
  return guarded([&] {
    require(cfg != nullptr && seeds != nullptr, "renyi_config_set_seeds: null argument");
    if (count == 0) renyi::fail(renyi::ErrorKind::config, "seeds must list at least one seed");
    cfg->value.seeds.assign(seeds, seeds + count);
  });
}

renyi_status renyi_config_set_output_dir(renyi_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg != nullptr && dir != nullptr, "renyi_config_set_output_dir: null argument");
    cfg->value.output_dir = dir;
  });
}

renyi_status renyi_config_output_dir(const renyi_config* cfg, const char** dir) {
  return guarded([&] {
    require(cfg != nullptr && dir != nullptr, "renyi_config_output_dir: null argument");
    *dir = cfg->value.output_dir.c_str();
  });
}

renyi_status renyi_config_fingerprint(const renyi_config* cfg, uint64_t* out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "renyi_config_fingerprint: null argument");
    *out = cfg->value.fingerprint();
  });
}

renyi_status renyi_config_serialize(const renyi_config* cfg, char** yaml_text) {
  return guarded([&] {
    require(cfg != nullptr && yaml_text != nullptr, "renyi_config_serialize: null argument");
    const std::string text = renyi::harness::serialize_config(cfg->value);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *yaml_text = buf;
  });
}

void renyi_string_free(char* text) { delete[] text; }

renyi_status renyi_run(const renyi_config* cfg, renyi_records** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "renyi_run: null argument");
    *out = new renyi_records{renyi::harness::run_experiment(cfg->value)};
  });
}

size_t renyi_records_count(const renyi_records* records) { return records ? records->value.size() : 0; }

size_t renyi_records_failed(const renyi_records* records) {
  if (records == nullptr) return 0;
  size_t failed = 0;
  for (const auto& r : records->value) failed += r.ok ? 0 : 1;
  return failed;
}

renyi_status renyi_records_error(const renyi_records* records, size_t index, const char** message) {
  return guarded([&] {
    require(records != nullptr && message != nullptr, "renyi_records_error: null argument");
    if (index >= records->value.size()) renyi::fail(renyi::ErrorKind::invalid_argument, "record index out of range");
    *message = records->value[index].error.c_str();
  });
}

renyi_status renyi_records_emit(const renyi_records* records, const renyi_config* cfg, const char* dir) {
  return guarded([&] {
    require(records != nullptr && cfg != nullptr && dir != nullptr, "renyi_records_emit: null argument");
    renyi::harness::emit_reports(records->value, cfg->value, dir);
  });
}

void renyi_records_free(renyi_records* records) { delete records; }

renyi_status renyi_estimate(const double* u, size_t n, size_t du, const double* v, size_t dv, const char* estimator,
                            uint64_t seed, renyi_estimate_result* out) {
  return guarded([&] {
    require(u != nullptr && v != nullptr && estimator != nullptr && out != nullptr, "renyi_estimate: null argument");
    require(du > 0 && dv > 0, "renyi_estimate: u and v need at least one column");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(n);
    const renyi::SampleMatrix um = Eigen::Map<const RowMajor>(u, rows, static_cast<Eigen::Index>(du));
    const renyi::SampleMatrix vm = Eigen::Map<const RowMajor>(v, rows, static_cast<Eigen::Index>(dv));
    fill(measure(um, vm, estimator, seed), out);
  });
}

renyi_status renyi_estimate_csv(const char* path, const char* u_columns, const char* v_columns,
                                const char* estimator, uint64_t seed, renyi_estimate_result* out) {
  return guarded([&] {
    require(path != nullptr && u_columns != nullptr && v_columns != nullptr && estimator != nullptr && out != nullptr,
            "renyi_estimate_csv: null argument");
    const std::vector<std::string> u_names = split_list(u_columns);
    const std::vector<std::string> v_names = split_list(v_columns);
    require(!u_names.empty() && !v_names.empty(), "renyi_estimate_csv: empty column list");
    std::vector<std::string> names = u_names;
    names.insert(names.end(), v_names.begin(), v_names.end());
    const renyi::harness::CsvColumns table = renyi::harness::read_csv_columns(path, names);
    const auto p = static_cast<Eigen::Index>(u_names.size());
    const renyi::SampleMatrix um = table.values.leftCols(p);
    const renyi::SampleMatrix vm = table.values.rightCols(table.values.cols() - p);
    fill(measure(um, vm, estimator, seed), out);
  });
}

renyi_status renyi_oracle_arctan(double alpha, size_t n_mc, uint64_t seed, renyi_oracle_result* out) {
  return guarded([&] {
    require(out != nullptr, "renyi_oracle_arctan: null argument");
    require(std::isfinite(alpha), "renyi_oracle_arctan: alpha must be finite");
    const renyi::synthetic::Bounds b = renyi::synthetic::oracle_simplified_hgr_bounds(alpha);
    out->lower = b.lower;
    out->upper = b.upper;
    out->monte_carlo = renyi::synthetic::oracle_mc_simplified_hgr(alpha, n_mc, seed);
  });
}

}  // extern "C"
