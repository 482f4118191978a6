#include "dxnn/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dxnn {

Evaluator environment_evaluator(const Environment& env) {
  return [&env](const Genome& g) { return evaluate_genome(env, g); };
}

std::vector<NodeId> build_ngn(const Genome& g) {
  std::vector<const NeuronGene*> order;
  for (const auto& n : g.neurons) order.push_back(&n);
  std::stable_sort(order.begin(), order.end(), [](const NeuronGene* a, const NeuronGene* b) {
    if (a->generation != b->generation) return a->generation > b->generation;
    return a->id < b->id;
  });
  if (order.empty()) return {};

  std::set<int, std::greater<>> gens;
  for (const auto* n : order) gens.insert(n->generation);
  auto it = gens.begin();
  int cutoff = *it;
  if (++it != gens.end()) cutoff = *it;

  std::vector<NodeId> ngn;
  std::size_t i = 0;
  while (i < order.size() && order[i]->generation >= cutoff) ngn.push_back(order[i++]->id);
  const std::size_t remaining = order.size() - i;
  const auto extra = static_cast<std::size_t>(round_half_up(std::sqrt(static_cast<double>(remaining))));
  for (std::size_t k = 0; k < extra && i < order.size(); ++k) ngn.push_back(order[i++]->id);
  return ngn;
}

int max_attempts(const TuningConfig& cfg, std::size_t ngn_weight_total) {
  long v = cfg.base_max_attempts + round_half_up(std::sqrt(static_cast<double>(ngn_weight_total)));
  return static_cast<int>(std::min<long>(cfg.max_attempts_cap, v));
}

double& weight_at(NeuronGene& n, std::size_t slot) {
  for (auto& w : n.weights) {
    if (slot < w.size()) return w[slot];
    slot -= w.size();
  }
  return *n.bias;
}

namespace {

// k distinct indices out of [0, n), in draw order.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(i), static_cast<int>(n) - 1));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

PerturbationDelta perturb(Genome& g, std::span<const NodeId> ngn, const TuningConfig& cfg, Rng& rng) {
  PerturbationDelta delta;
  if (ngn.empty()) return delta;
  const double half = cfg.weight_limit / 2;
  const int k = uniform_int(rng, 1, rim_bound(ngn.size()));
  for (auto ni : sample_distinct(ngn.size(), static_cast<std::size_t>(k), rng)) {
    NeuronGene* n = g.find_neuron(ngn[ni]);
    const std::size_t total = n->weight_count();
    if (total == 0) continue;
    const int m = uniform_int(rng, 1, rim_bound(total));
    for (auto slot : sample_distinct(total, static_cast<std::size_t>(m), rng)) {
      double d;
      do {
        d = uniform_real(rng, -half, half);
      } while (std::abs(d) >= half);
      double& w = weight_at(*n, slot);
      WeightChange c{n->id, slot, w, w + d};
      if (cfg.clamp_weights) c.after = std::clamp(c.after, -cfg.weight_limit, cfg.weight_limit);
      w = c.after;
      delta.changes.push_back(c);
    }
  }
  return delta;
}

void revert(Genome& g, const PerturbationDelta& delta) {
  for (auto it = delta.changes.rbegin(); it != delta.changes.rend(); ++it)
    weight_at(*g.find_neuron(it->neuron), it->slot) = it->before;
}

TuningOutcome tune(Genome g, const Evaluator& eval, const TuningConfig& cfg, Rng& rng, long budget) {
  TuningOutcome out;
  if (budget <= 0) {
    out.best_genome = std::move(g);
    return out;
  }
  const auto ngn = build_ngn(g);
  std::size_t ngn_weights = 0;
  for (auto id : ngn) ngn_weights += g.find_neuron(id)->weight_count();
  const int limit = max_attempts(cfg, ngn_weights);

  out.best_result = eval(g);
  out.best_fitness = out.best_result.fitness;
  out.evaluations_used = 1;
  out.solved = out.best_result.solved;

  int counter = 1;
  while (!out.solved && counter <= limit && out.evaluations_used < budget) {
    auto delta = perturb(g, ngn, cfg, rng);
    auto r = eval(g);
    ++out.evaluations_used;
    const bool better = r.fitness > out.best_fitness;
    if (better || r.solved) {
      out.best_fitness = r.fitness;
      out.best_result = r;
      out.solved = r.solved;
      counter = 1;
    } else {
      revert(g, delta);
      ++counter;
    }
    out.attempts_history.push_back({r.fitness, better || r.solved});
  }
  out.best_genome = std::move(g);
  return out;
}

PopulationTuning tune_population_serial(std::span<const Genome> genomes, const Evaluator& eval,
                                        const TuningConfig& cfg, std::uint64_t stream_seed, long budget) {
  PopulationTuning res;
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    const long left = budget - res.evaluations;
    if (left <= 0) break;
    Rng rng = make_rng(stream_seed, {i});
    res.outcomes.push_back(tune(genomes[i], eval, cfg, rng, left));
    res.evaluations += res.outcomes.back().evaluations_used;
    if (res.outcomes.back().solved) {
      res.solved_index = i;
      break;
    }
  }
  return res;
}

}  // namespace dxnn
