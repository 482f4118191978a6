#pragma once

#include <climits>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "dxnn/environments.hpp"
#include "dxnn/genome.hpp"

namespace dxnn {

struct TuningConfig {
  int base_max_attempts = 10;
  int max_attempts_cap = 100;
  double weight_limit = std::numbers::pi;
  bool clamp_weights = true;  // keep weights inside [-weight_limit, weight_limit]
};

struct Attempt {
  double fitness = 0.0;
  bool accepted = false;
};

struct TuningOutcome {
  double best_fitness = 0.0;
  Genome best_genome;
  EvalResult best_result;
  long evaluations_used = 0;  // attempts_history.size() + 1 once the baseline ran
  std::vector<Attempt> attempts_history;
  bool solved = false;
};

using Evaluator = std::function<EvalResult(const Genome&)>;

Evaluator environment_evaluator(const Environment& env);

/// Neurons selected for weight tuning: every neuron from the two newest
/// generation values present, then round(sqrt(rest)) of the next most
/// recent ones. Ties within a generation are broken by id.
std::vector<NodeId> build_ngn(const Genome& g);

/// min(cap, base + round(sqrt(ngn_weight_total))).
int max_attempts(const TuningConfig& cfg, std::size_t ngn_weight_total);

/// One changed weight. `slot` indexes the neuron's weights flattened in
/// input order with the bias last.
struct WeightChange {
  NodeId neuron;
  std::size_t slot = 0;
  double before = 0.0;
  double after = 0.0;
};

struct PerturbationDelta {
  std::vector<WeightChange> changes;
};

double& weight_at(NeuronGene& n, std::size_t slot);

/// Random-intensity perturbation of NGN weights, applied to `g` in place.
/// Picks 1..max(1,round(sqrt(|ngn|))) distinct neurons; each perturbs
/// 1..max(1,round(sqrt(own weights))) distinct weights by a value drawn
/// from (-weight_limit/2, weight_limit/2).
PerturbationDelta perturb(Genome& g, std::span<const NodeId> ngn, const TuningConfig& cfg, Rng& rng);

/// Undo `delta` exactly.
void revert(Genome& g, const PerturbationDelta& delta);

/// Accept/revert hill climb over the NGN weights. Stops after
/// max_attempts consecutive non-improving attempts, on the first solving
/// evaluation, or when `budget` evaluations have been spent. A solving
/// evaluation is kept even if it does not beat the incumbent fitness.
TuningOutcome tune(Genome g, const Evaluator& eval, const TuningConfig& cfg, Rng& rng, long budget = LONG_MAX);

/// Tuning of a whole population with a shared evaluation budget. Result
/// semantics are those of tuning genomes one after another in order:
/// genome i sees the budget left by genomes before it, and the phase
/// ends at the first solving genome.
struct PopulationTuning {
  std::vector<TuningOutcome> outcomes;  // one per genome that was tuned, in order
  long evaluations = 0;
  std::optional<std::size_t> solved_index;
};

/// Reference implementation.
PopulationTuning tune_population_serial(std::span<const Genome> genomes, const Evaluator& eval,
                                        const TuningConfig& cfg, std::uint64_t stream_seed, long budget);

/// OpenMP version; identical results for any worker count.
PopulationTuning tune_population_parallel(std::span<const Genome> genomes, const Evaluator& eval,
                                          const TuningConfig& cfg, std::uint64_t stream_seed, long budget,
                                          int workers);

}  // namespace dxnn
