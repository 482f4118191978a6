#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dxnn/genome.hpp"

namespace dxnn {

struct ScoredGenome {
  Genome genome;
  double fitness = 0.0;
  std::size_t tot_neurons = 0;
};

struct Allotment {
  NodeId dxnn_id;
  std::size_t index = 0;  // position in the scored input
  long nao = 0;
};

/// Complexity-priced offspring allotment. Survivors (top n - floor(n/2) by
/// fitness, smaller genomes first on ties) are returned in rank order.
///   AEC = sum(f) / sum(size) over the whole population
///   AO  = round((f / AEC) / size)
///   NAO = round(AO / (sum(AO) / limit))
/// If every AO rounds to zero the top survivor gets NAO = 1.
/// Throws DegeneratePopulation when every fitness is zero and
/// std::invalid_argument for negative or non-finite fitness.
std::vector<Allotment> competition_select(std::span<const ScoredGenome> scored, long population_limit);

using OffspringFn = std::function<Genome(const Genome& parent, NodeId new_id)>;

/// Survivors in rank order, then (nao - 1) offspring per survivor with
/// fresh dxnn ids drawn from `next_dxnn_id` (incremented per offspring).
std::vector<Genome> apply_allotments(std::span<const ScoredGenome> scored, std::span<const Allotment> allotments,
                                     const OffspringFn& make_offspring, std::uint64_t& next_dxnn_id);

}  // namespace dxnn
