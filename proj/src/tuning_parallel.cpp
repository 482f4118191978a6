#include <exception>

#include "dxnn/tuning.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dxnn {

// Every genome is tuned concurrently against the whole remaining budget.
// A serial pass then replays the in-order budget accounting; a genome
// that overran its in-order share is re-tuned with that share from the
// same stream, which reproduces the serial trajectory prefix.
PopulationTuning tune_population_parallel(std::span<const Genome> genomes, const Evaluator& eval,
                                          const TuningConfig& cfg, std::uint64_t stream_seed, long budget,
                                          int workers) {
  const auto n = static_cast<long>(genomes.size());
  std::vector<TuningOutcome> speculative(genomes.size());
  std::vector<std::exception_ptr> errors(genomes.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : 1)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      Rng rng = make_rng(stream_seed, {k});
      speculative[k] = tune(genomes[k], eval, cfg, rng, budget);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  PopulationTuning res;
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    const long left = budget - res.evaluations;
    if (left <= 0) break;
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (speculative[i].evaluations_used > left) {
      Rng rng = make_rng(stream_seed, {i});
      speculative[i] = tune(genomes[i], eval, cfg, rng, left);
    }
    res.outcomes.push_back(std::move(speculative[i]));
    res.evaluations += res.outcomes.back().evaluations_used;
    if (res.outcomes.back().solved) {
      res.solved_index = i;
      break;
    }
  }
  return res;
}

}  // namespace dxnn
