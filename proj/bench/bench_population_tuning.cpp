// Serial reference against the OpenMP population tuner on one tuning
// phase of a dpb_v population.

#include <benchmark/benchmark.h>

#include "dxnn/errors.hpp"
#include "dxnn/harness.hpp"
#include "dxnn/mutation.hpp"
#include "dxnn/tuning.hpp"

using namespace dxnn;

namespace {

struct Fixture {
  std::unique_ptr<Environment> env = make_environment(EnvKind::dpb_v);
  Evaluator eval = environment_evaluator(*env);
  std::vector<Genome> genomes;
  TuningConfig cfg;

  Fixture() {
    ExperimentConfig ec = default_config(EnvKind::dpb_v);
    Rng rng(5);
    genomes = seed_population(ec, rng).genomes;
    MutationContext ctx{env->sensors(), env->actuators(), ec.k_ratio, ec.catalog, 10};
    for (auto& g : genomes)
      for (int k = 0; k < 3; ++k) {
        try {
          g = mutate_offspring(g, g.dxnn_id, ctx, rng);
        } catch (const MutationError&) {
        }
      }
    cfg.base_max_attempts = ec.base_max_attempts;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_TuneSerial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto r = tune_population_serial(f.genomes, f.eval, f.cfg, 42, 2000);
    benchmark::DoNotOptimize(r.evaluations);
  }
}
BENCHMARK(BM_TuneSerial)->Unit(benchmark::kMillisecond);

void BM_TuneParallel(benchmark::State& state) {
  auto& f = fixture();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = tune_population_parallel(f.genomes, f.eval, f.cfg, 42, 2000, workers);
    benchmark::DoNotOptimize(r.evaluations);
  }
}
BENCHMARK(BM_TuneParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
