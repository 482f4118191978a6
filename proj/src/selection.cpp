#include "dxnn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dxnn/errors.hpp"
#include "dxnn/random.hpp"

namespace dxnn {

std::vector<Allotment> competition_select(std::span<const ScoredGenome> scored, long population_limit) {
  if (scored.empty()) throw std::invalid_argument("competition_select: empty population");
  if (population_limit < 1) throw std::invalid_argument("competition_select: population limit must be positive");

  double tot_energy = 0.0, tot_neurons = 0.0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.fitness) || s.fitness < 0)
      throw std::invalid_argument("competition_select: fitness must be finite and non-negative");
    if (s.tot_neurons == 0) throw std::invalid_argument("competition_select: genome without neurons");
    tot_energy += s.fitness;
    tot_neurons += static_cast<double>(s.tot_neurons);
  }
  if (tot_energy == 0.0) throw DegeneratePopulation("every genome has zero fitness");
  const double aec = tot_energy / tot_neurons;

  std::vector<std::size_t> rank(scored.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].fitness != scored[b].fitness) return scored[a].fitness > scored[b].fitness;
    return scored[a].tot_neurons < scored[b].tot_neurons;
  });
  rank.resize(scored.size() - scored.size() / 2);

  std::vector<Allotment> out;
  long ao_sum = 0;
  for (auto i : rank) {
    const auto& s = scored[i];
    long ao = round_half_up((s.fitness / aec) / static_cast<double>(s.tot_neurons));
    out.push_back({s.genome.dxnn_id, i, ao});
    ao_sum += ao;
  }
  if (ao_sum == 0) {
    out.front().nao = 1;
    return out;
  }
  const double normalizer = static_cast<double>(ao_sum) / static_cast<double>(population_limit);
  for (auto& a : out) a.nao = round_half_up(static_cast<double>(a.nao) / normalizer);
  return out;
}

std::vector<Genome> apply_allotments(std::span<const ScoredGenome> scored, std::span<const Allotment> allotments,
                                     const OffspringFn& make_offspring, std::uint64_t& next_dxnn_id) {
  std::vector<Genome> next;
  for (const auto& a : allotments)
    if (a.nao > 0) next.push_back(scored[a.index].genome);
  for (const auto& a : allotments)
    for (long k = 1; k < a.nao; ++k) next.push_back(make_offspring(scored[a.index].genome, NodeId{next_dxnn_id++}));
  return next;
}

}  // namespace dxnn
