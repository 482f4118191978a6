#pragma once

// Heritable description of one modular network: a Core supervising
// SubCores, each supervising a cluster of Neurons. Everything is a plain
// value type; mutation produces new genomes instead of editing shared ones.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dxnn/random.hpp"

namespace dxnn {

/// Element id. Unique among all elements (core, sensor and actuator
/// ports, subcores, neurons) of one genome. Genome ids are unique
/// within a population.
struct NodeId {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class Activation { tanh, sigmoid, gaussian, sine };
enum class Learning { none, hebbian };
enum class LinkKind { single, block, all };
enum class SubCoreKind { neural, substrate };

const char* to_string(Activation a);
const char* to_string(Learning l);
const char* to_string(LinkKind k);
const char* to_string(SubCoreKind k);
std::optional<Activation> parse_activation(std::string_view s);
std::optional<Learning> parse_learning(std::string_view s);
std::optional<LinkKind> parse_link_kind(std::string_view s);
std::optional<SubCoreKind> parse_subcore_kind(std::string_view s);

using ParameterList = std::vector<std::pair<std::string, std::string>>;

/// One incoming vector: who sends it and how long it is.
struct InputEntry {
  NodeId from;
  int length = 0;
  friend bool operator==(const InputEntry&, const InputEntry&) = default;
};

struct NeuronGene {
  NodeId id;
  std::vector<InputEntry> inputs;
  std::vector<NodeId> outputs;
  Activation activation = Activation::tanh;
  Learning learning = Learning::none;
  std::vector<std::vector<double>> weights;  // one vector per input entry
  std::optional<double> bias;                // trailing weight with implicit input 1
  ParameterList parameters;
  int generation = 0;

  std::size_t weight_count() const;
  friend bool operator==(const NeuronGene&, const NeuronGene&) = default;
};

/// How a SubCore slices its input vectors for one of its neurons.
/// `from` is absent for all-type links; `index` is 1-based and present
/// only for single-type links.
struct LinkSpec {
  NodeId to;
  std::optional<NodeId> from;
  LinkKind kind = LinkKind::block;
  std::optional<int> index;
  friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct SubCoreGene {
  NodeId id;
  std::vector<InputEntry> inputs;
  std::vector<NodeId> outputs;
  std::vector<LinkSpec> connected_to;   // routes into neurons
  std::vector<NodeId> connected_from;   // neurons forming the output vector, in order
  SubCoreKind kind = SubCoreKind::neural;
  ParameterList parameters;
  std::vector<NodeId> neurons;
  int generation = 0;

  int output_length() const { return static_cast<int>(connected_from.size()); }
  friend bool operator==(const SubCoreGene&, const SubCoreGene&) = default;
};

/// A sensor program feeding one subcore. Each entry is its own port id,
/// so one subcore can receive several sensors and one sensor tag can
/// feed several subcores.
struct SensorLink {
  NodeId id;
  NodeId subcore;
  std::string tag;
  int length = 0;
  friend bool operator==(const SensorLink&, const SensorLink&) = default;
};

/// An actuator program fed by one subcore. The core pads or truncates
/// the subcore output to `length`.
struct ActuatorLink {
  NodeId id;
  NodeId subcore;
  std::string tag;
  int length = 0;
  friend bool operator==(const ActuatorLink&, const ActuatorLink&) = default;
};

struct HistoryEntry {
  std::string mutation_operator;
  NodeId element;
  std::string info;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct CoreGene {
  NodeId id;
  std::vector<SensorLink> sensors;
  std::vector<ActuatorLink> actuators;
  ParameterList parameters;
  std::vector<NodeId> subcores;
  int generation = 0;
  std::vector<HistoryEntry> history;
  friend bool operator==(const CoreGene&, const CoreGene&) = default;
};

struct Genome {
  NodeId dxnn_id;
  CoreGene core;
  std::vector<SubCoreGene> subcores;  // sorted by id
  std::vector<NeuronGene> neurons;    // sorted by id

  const NeuronGene* find_neuron(NodeId id) const;
  NeuronGene* find_neuron(NodeId id);
  const SubCoreGene* find_subcore(NodeId id) const;
  SubCoreGene* find_subcore(NodeId id);
  const SensorLink* find_sensor(NodeId id) const;
  const ActuatorLink* find_actuator(NodeId id) const;

  /// Subcore that supervises `neuron`, or nullptr.
  const SubCoreGene* supervisor_of(NodeId neuron) const;

  /// Largest id in use plus one.
  NodeId next_id() const;

  std::size_t neuron_count() const { return neurons.size(); }
  std::size_t weight_count() const;

  /// Length of the vector `source` emits (sensor port or subcore output).
  std::optional<int> source_length(NodeId source) const;

  friend bool operator==(const Genome&, const Genome&) = default;
};

struct Population {
  NodeId population_id;
  std::vector<Genome> genomes;
  int generation_counter = 0;
  friend bool operator==(const Population&, const Population&) = default;
};

struct SensorSpec {
  std::string tag;
  int length = 0;
};

struct ActuatorSpec {
  std::string tag;
  int length = 0;
};

/// Per-genome construction choices shared by seeding and mutation.
struct GeneCatalog {
  std::vector<Activation> activations{Activation::tanh};
  std::vector<Learning> learnings{Learning::none};
};

/// Length of the vector `link` delivers to its neuron inside `sc`.
std::optional<int> route_length(const SubCoreGene& sc, const LinkSpec& link);

/// Initial and newly created weights are drawn from (-pi/2, pi/2).
double random_weight(Rng& rng);

/// Minimal seed network. One sensor and one actuator yield one subcore
/// holding actuator-length neurons; N sensors and K actuators yield two
/// fully interconnected subcore layers.
Genome new_minimal_genome(std::span<const SensorSpec> sensors,
                          std::span<const ActuatorSpec> actuators, Rng& rng,
                          const GeneCatalog& catalog = {});

struct Violation {
  NodeId element;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Every invariant violation found in `g`. Empty means valid.
ValidationReport validate(const Genome& g);

std::string describe(const ValidationReport& report);

}  // namespace dxnn

template <>
struct std::hash<dxnn::NodeId> {
  std::size_t operator()(dxnn::NodeId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
