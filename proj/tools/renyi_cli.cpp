#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "renyi/renyi.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

int exit_code(renyi_status status) {
  switch (status) {
    case RENYI_OK: return kExitOk;
    case RENYI_ERR_CONFIG:
    case RENYI_ERR_INVALID_ARGUMENT:
    case RENYI_ERR_IO: return kExitConfig;
    default: return kExitRun;
  }
}

int report(renyi_status status) {
  std::fprintf(stderr, "renyi: %s: %s\n", renyi_status_name(status), renyi_last_error());
  return exit_code(status);
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir,
            const std::optional<std::uint64_t>& seed_override) {
  renyi_config* cfg = nullptr;
  if (renyi_status s = renyi_config_load(config_path.c_str(), &cfg); s != RENYI_OK) return report(s);
  int code = kExitOk;
  renyi_records* records = nullptr;
  const char* dir = nullptr;
  renyi_status s = RENYI_OK;
  if (seed_override) s = renyi_config_set_seeds(cfg, &*seed_override, 1);
  if (s == RENYI_OK && out_dir) s = renyi_config_set_output_dir(cfg, out_dir->c_str());
  if (s == RENYI_OK) s = renyi_config_output_dir(cfg, &dir);
  if (s != RENYI_OK) {
    code = report(s);
  } else if (s = renyi_run(cfg, &records); s != RENYI_OK) {
    code = report(s);
  } else if (s = renyi_records_emit(records, cfg, dir); s != RENYI_OK) {
    code = report(s);
  } else {
    const size_t total = renyi_records_count(records);
    const size_t failed = renyi_records_failed(records);
    std::printf("%zu runs, %zu failed; reports in %s\n", total, failed, dir);
    for (size_t i = 0; i < total && failed > 0; ++i) {
      const char* message = nullptr;
      if (renyi_records_error(records, i, &message) == RENYI_OK && message[0] != '\0') {
        std::fprintf(stderr, "renyi: run %zu failed: %s\n", i, message);
      }
    }
    if (failed > 0) code = kExitRun;
  }
  renyi_records_free(records);
  renyi_config_free(cfg);
  return code;
}

int cmd_estimate(const std::string& csv, const std::string& u, const std::string& v, const std::string& estimator,
                 std::uint64_t seed) {
  renyi_estimate_result r{};
  if (renyi_status s = renyi_estimate_csv(csv.c_str(), u.c_str(), v.c_str(), estimator.c_str(), seed, &r);
      s != RENYI_OK) {
    return report(s);
  }
  std::printf("estimator: %s\nn: %zu\nestimate: %.6g\nraw_estimate: %.6g\n", estimator.c_str(), r.n, r.estimate,
              r.raw_estimate);
  if (r.degenerate) std::printf("degenerate: true\n");
  if (r.bins_merged) std::printf("bins_merged: true\n");
  if (r.ridge_added) std::printf("ridge_added: true\n");
  return kExitOk;
}

int cmd_oracle(double alpha, std::size_t n_mc, std::uint64_t seed) {
  renyi_oracle_result r{};
  if (renyi_status s = renyi_oracle_arctan(alpha, n_mc, seed, &r); s != RENYI_OK) return report(s);
  std::printf("alpha: %.6g\nlower: %.6g\nupper: %.6g\nmonte_carlo: %.6g\nn_mc: %zu\n", alpha, r.lower, r.upper,
              r.monte_carlo, n_mc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximal-correlation estimation and fair representation training"};
  app.set_version_flag("--version", std::string(renyi_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed_override;
  CLI::App* run = app.add_subcommand("run", "Run the lambda x seed grid of an experiment config");
  run->add_option("config", config_path, "YAML experiment config")->required();
  run->add_option("--out", out_dir, "Report directory (overrides output_dir)");
  run->add_option("--seed-override", seed_override, "Replace the seed list with this single seed");

  std::string csv, u_cols, v_cols, estimator = "nn";
  std::uint64_t est_seed = 0;
  CLI::App* estimate = app.add_subcommand("estimate", "Dependence between two column groups of a CSV file");
  estimate->add_option("csv", csv, "Headed CSV file")->required();
  estimate->add_option("--u", u_cols, "Comma-separated u columns")->required();
  estimate->add_option("--v", v_cols, "Comma-separated v columns")->required();
  estimate->add_option("--estimator", estimator, "nn, kde, rdc, mine or pearson")->capture_default_str();
  estimate->add_option("--seed", est_seed, "Estimator seed")->capture_default_str();

  double alpha = 0.0;
  std::size_t n_mc = 100000;
  std::uint64_t oracle_seed = 0;
  CLI::App* oracle = app.add_subcommand("oracle", "Analytic oracles");
  CLI::App* arctan = oracle->add_subcommand("arctan", "Bounds and Monte-Carlo value of rho(E(Y|X), Y)");
  oracle->require_subcommand(1);
  arctan->add_option("--alpha", alpha, "mu / sigma")->required();
  arctan->add_option("--n-mc", n_mc, "Monte-Carlo draws")->capture_default_str();
  arctan->add_option("--seed", oracle_seed, "Monte-Carlo seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, seed_override);
  if (estimate->parsed()) return cmd_estimate(csv, u_cols, v_cols, estimator, est_seed);
  return cmd_oracle(alpha, n_mc, oracle_seed);
}
