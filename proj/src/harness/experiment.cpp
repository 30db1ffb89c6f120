#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "renyi/error.hpp"
#include "renyi/harness.hpp"
#include "renyi/random.hpp"

#ifndef RENYI_VERSION
#define RENYI_VERSION "0.0.0"
#endif

namespace renyi::harness {

namespace {

enum SeedTag : std::uint64_t {
  kSplitStream = 42,
  kEstimatorStream = 43,
};

RunRecord execute(const ExperimentConfig& cfg, const Dataset* shared, double lambda, std::uint64_t seed) {
  RunRecord rec;
  rec.fingerprint = cfg.fingerprint();
  rec.version = version_string();
  rec.lambda = lambda;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Dataset data = shared != nullptr ? *shared : load_scenario(cfg.scenario, seed);
    const auto [train, test] = split(data, cfg.scenario.test_fraction, CounterRng::derive(seed, kSplitStream));
    fair::FairTrainConfig tc = cfg.train;
    tc.lambda = lambda;
    tc.seed = seed;
    fair::TrainOutput out = fair::train(train, tc);
    fair::EvalOptions ev = cfg.eval_options();
    ev.estimator.seed = CounterRng::derive(CounterRng::derive(seed, kEstimatorStream), cfg.estimator.seed);
    out.result.final = fair::evaluate(out.model, test, ev);
    rec.result = std::move(out.result);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  rec.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

std::string version_string() { return RENYI_VERSION; }

unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("RENYI_THREADS"); env != nullptr) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<Dataset> shared;
  if (cfg.scenario.kind == ScenarioKind::csv) shared = ingest_csv(cfg.scenario.csv_path, cfg.scenario.schema).data;

  struct Job {
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double l : cfg.lambdas) {
    for (std::uint64_t s : cfg.seeds) jobs.push_back({l, s});
  }
  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      records[i] = execute(cfg, shared ? &*shared : nullptr, jobs[i].lambda, jobs[i].seed);
    }
  };
  const unsigned threads = std::min<unsigned>(worker_count(), static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < records.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "run_%03zu", i);
    records[i].run_id = id;
  }
  return records;
}

}  // namespace renyi::harness
