#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dxnn/environments.hpp"
#include "dxnn/genome.hpp"

namespace dxnn {

struct ExperimentConfig {
  EnvKind environment = EnvKind::xor_gate;
  long population_limit = 10;
  int base_max_attempts = 10;
  long max_evaluations = 50000;
  int runs = 1;
  std::uint64_t master_seed = 1;
  double k_ratio = 5.0;
  GeneCatalog catalog;
  int workers = 1;
};

/// Defaults for `env`; base_max_attempts is 10 for dpb_v and 20 otherwise.
ExperimentConfig default_config(EnvKind env);

/// Throws ConfigError on out-of-range fields.
void check_config(const ExperimentConfig& cfg);

/// key=value lines (blank lines and '#' comments ignored) applied on top
/// of `base`. Keys: env, pop_limit, base_max_attempts, max_evals, runs,
/// seed, k_ratio, workers, af_catalog, lm_catalog (comma separated).
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base);

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  bool solved = false;
  long evaluations = 0;
  std::size_t champion_size = 0;
  int generations = 0;  // tuning phases executed
  double champion_fitness = 0.0;
  Genome champion;
  std::string note;  // e.g. extinction
};

/// Observer called after every selection+mutation cycle with the next
/// population and the evaluations spent so far.
using GenerationHook = std::function<void(const Population&, long evaluations)>;

/// The `population_limit` seed genomes for a run.
Population seed_population(const ExperimentConfig& cfg, Rng& rng);

/// Tuning, selection and mutation from `start` until a genome solves the
/// task, the budget runs out or the population goes extinct.
RunRecord evolve(const ExperimentConfig& cfg, std::uint64_t seed, Population start, long evaluations_spent = 0,
                 const GenerationHook& hook = {});

RunRecord run_once(const ExperimentConfig& cfg, std::uint64_t seed, const GenerationHook& hook = {});

std::uint64_t run_seed(std::uint64_t master_seed, int run_index);

struct ExperimentReport {
  EnvKind environment = EnvKind::xor_gate;
  std::vector<RunRecord> runs;
  double solve_rate = 0.0;
  // Over solved runs only; zero when nothing solved.
  double mean_evaluations = 0.0;
  double median_evaluations = 0.0;
  double stddev_evaluations = 0.0;  // sample standard deviation
  std::map<std::size_t, int> size_histogram;  // champion neurons -> runs (solved runs)
};

ExperimentReport summarize(EnvKind env, std::vector<RunRecord> runs);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string report_csv(const ExperimentReport& r);
std::string report_summary(const ExperimentReport& r);

/// report.csv, summary.txt and champions/run_<i>.dxnn under `dir`.
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);

/// Snapshot file I/O. Errors carry the path.
void snapshot(const Population& pop, const std::filesystem::path& path);
Population restore(const std::filesystem::path& path);

/// Environment recorded in a genome's core parameters, if any.
std::optional<EnvKind> genome_environment(const Genome& g);

}  // namespace dxnn
