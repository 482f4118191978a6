#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "dxnn/genome.hpp"

namespace dxnn {

enum class MutationOperator {
  add_neuron,
  add_link,
  splice_neuron,
  change_af,
  change_lm,
  add_bias,
  add_subcore,
  add_subcore_link,
  splice_subcore,
};

inline constexpr std::array<MutationOperator, 9> kAllOperators{
    MutationOperator::add_neuron,  MutationOperator::add_link,    MutationOperator::splice_neuron,
    MutationOperator::change_af,   MutationOperator::change_lm,   MutationOperator::add_bias,
    MutationOperator::add_subcore, MutationOperator::add_subcore_link, MutationOperator::splice_subcore,
};

std::string_view to_string(MutationOperator op);
std::optional<MutationOperator> parse_mutation_operator(std::string_view s);
bool is_subcore_level(MutationOperator op);

struct MutationContext {
  std::vector<SensorSpec> available_sensors;
  std::vector<ActuatorSpec> available_actuators;
  double k_ratio = 5.0;  // subcore-level operators need neurons/subcores > k_ratio
  GeneCatalog catalog;
  int max_redraws = 10;  // per operator slot
};

/// Uniform in [1, max(1, round(sqrt(neurons)))].
int mo_count(const Genome& parent, Rng& rng);

bool subcore_ops_enabled(const Genome& g, const MutationContext& ctx);

/// Operators the gate allows for `g`. An allowed operator may still turn
/// out inapplicable, in which case apply_operator returns nullopt.
std::vector<MutationOperator> available_operators(const Genome& g, const MutationContext& ctx);

/// Applies `op` to a copy of `g`. Touched elements and their supervisors
/// take the core's current generation and one history entry is appended.
/// Returns nullopt when the operator has nothing to act on.
std::optional<Genome> apply_operator(const Genome& g, MutationOperator op, const MutationContext& ctx, Rng& rng);

/// Clone with id `child_id`, core generation bumped once, and mo_count
/// operators applied in sequence. Throws MutationError if no operator
/// could be applied.
Genome mutate_offspring(const Genome& parent, NodeId child_id, const MutationContext& ctx, Rng& rng);

}  // namespace dxnn
