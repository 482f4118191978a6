#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dxnn/genome.hpp"

namespace dxnn {

inline constexpr double kHebbianRate = 0.1;

double activate(Activation af, double x);

/// A named input vector as seen by a subcore while it builds routes.
template <typename T>
struct RouteSource {
  NodeId from;
  std::span<const T> values;
};

/// Slice a subcore's ordered input vectors for one link:
/// single -> [source[index]], block -> source, all -> concatenation in
/// declared input order. Throws RoutingError when the link cannot be
/// satisfied, which only happens for invalid genomes.
template <typename T>
std::vector<T> route(std::span<const RouteSource<T>> inputs, const LinkSpec& spec);

/// Executable state of one neuron. `weights` is flat: input weights in
/// input order, then the bias weight when `has_bias`.
struct NeuronState {
  Activation activation = Activation::tanh;
  Learning learning = Learning::none;
  std::vector<double> weights;
  bool has_bias = false;
  double hebbian_rate = kHebbianRate;
  double weight_limit = 3.14159265358979323846;

  std::size_t input_length() const { return weights.size() - (has_bias ? 1 : 0); }
};

/// output = af(w . input + bias). Under hebbian learning the weights are
/// then moved by rate * output * input_i and clamped to +-weight_limit.
double neuron_step(NeuronState& state, std::span<const double> input);

/// Executable network compiled from a genome. Single owner; not thread
/// safe. Neurons run in one fixed schedule per cycle. Feed-forward links
/// read the current cycle's value; links closing a cycle (found by a
/// depth-first walk in id order, subcores first, then neurons inside
/// each subcore) read the sender's previous-cycle output, initially 0.
class Phenotype {
 public:
  using NamedVectors = std::vector<std::pair<std::string, std::vector<double>>>;

  struct CompiledNeuron {
    NodeId id;
    std::vector<std::uint32_t> gather;  // value-store slot per input element
    NeuronState state;
  };

  /// Sensor tags in the order `cycle_into` expects them, with lengths.
  const std::vector<SensorSpec>& sensors() const { return sensors_; }
  /// Actuator tags in core order, with lengths.
  const std::vector<ActuatorSpec>& actuators() const { return actuators_; }

  std::size_t sensor_width() const { return sensor_width_; }
  std::size_t actuator_width() const;

  /// Neurons in evaluation order.
  const std::vector<CompiledNeuron>& schedule() const { return schedule_; }

  /// Number of (neuron, input) edges that read previous-cycle state.
  std::size_t recurrent_edge_count() const { return recurrent_edges_; }

  /// One full sense-think-act pass. Throws InputError on a missing or
  /// mis-sized sensor vector.
  NamedVectors cycle(const NamedVectors& sensors);

  /// Allocation-free pass over flat buffers: `sensors` concatenated in
  /// sensors() order, `actuators` receives actuators() concatenated.
  void cycle_into(std::span<const double> sensors, std::span<double> actuators);

  /// Back to the freshly compiled state: memories zeroed, weights restored.
  void reset();

 private:
  friend Phenotype compile(const Genome& g);

  struct ActuatorRoute {
    std::vector<std::uint32_t> slots;  // may be shorter than the actuator
    int length = 0;
  };

  std::vector<SensorSpec> sensors_;
  std::vector<ActuatorSpec> actuators_;
  std::size_t sensor_width_ = 0;
  std::size_t neuron_base_ = 0;  // slot of first current-cycle neuron output
  std::size_t prev_base_ = 0;    // slot of first previous-cycle neuron output
  std::vector<double> store_;
  std::vector<CompiledNeuron> schedule_;
  std::vector<std::uint32_t> schedule_slot_;  // neuron output slot per scheduled neuron
  std::vector<ActuatorRoute> actuator_routes_;
  std::vector<std::vector<double>> initial_weights_;
  std::vector<double> scratch_;
  std::size_t recurrent_edges_ = 0;
};

/// Throws CompileError listing violations when validate(g) is not empty.
Phenotype compile(const Genome& g);

}  // namespace dxnn
