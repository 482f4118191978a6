#include "dxnn/genome.hpp"

#include <algorithm>
#include <numbers>

#include "dxnn/errors.hpp"

namespace dxnn {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::gaussian: return "gaussian";
    case Activation::sine: return "sine";
  }
  return "?";
}

const char* to_string(Learning l) {
  switch (l) {
    case Learning::none: return "none";
    case Learning::hebbian: return "hebbian";
  }
  return "?";
}

const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::single: return "single";
    case LinkKind::block: return "block";
    case LinkKind::all: return "all";
  }
  return "?";
}

const char* to_string(SubCoreKind k) {
  switch (k) {
    case SubCoreKind::neural: return "neural";
    case SubCoreKind::substrate: return "substrate";
  }
  return "?";
}

std::optional<Activation> parse_activation(std::string_view s) {
  for (auto a : {Activation::tanh, Activation::sigmoid, Activation::gaussian, Activation::sine})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

std::optional<Learning> parse_learning(std::string_view s) {
  for (auto l : {Learning::none, Learning::hebbian})
    if (s == to_string(l)) return l;
  return std::nullopt;
}

std::optional<LinkKind> parse_link_kind(std::string_view s) {
  for (auto k : {LinkKind::single, LinkKind::block, LinkKind::all})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::optional<SubCoreKind> parse_subcore_kind(std::string_view s) {
  for (auto k : {SubCoreKind::neural, SubCoreKind::substrate})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::size_t NeuronGene::weight_count() const {
  std::size_t n = bias ? 1 : 0;
  for (const auto& w : weights) n += w.size();
  return n;
}

namespace {

template <typename Vec>
auto find_by_id(Vec& v, NodeId id) -> decltype(v.data()) {
  auto it = std::lower_bound(v.begin(), v.end(), id, [](const auto& e, NodeId x) { return e.id < x; });
  if (it != v.end() && it->id == id) return &*it;
  // Fall back to a scan for genomes whose vectors are not yet sorted.
  for (auto& e : v)
    if (e.id == id) return &e;
  return nullptr;
}

}  // namespace

const NeuronGene* Genome::find_neuron(NodeId id) const { return find_by_id(neurons, id); }
NeuronGene* Genome::find_neuron(NodeId id) { return find_by_id(neurons, id); }
const SubCoreGene* Genome::find_subcore(NodeId id) const { return find_by_id(subcores, id); }
SubCoreGene* Genome::find_subcore(NodeId id) { return find_by_id(subcores, id); }

const SensorLink* Genome::find_sensor(NodeId id) const {
  for (const auto& s : core.sensors)
    if (s.id == id) return &s;
  return nullptr;
}

const ActuatorLink* Genome::find_actuator(NodeId id) const {
  for (const auto& a : core.actuators)
    if (a.id == id) return &a;
  return nullptr;
}

const SubCoreGene* Genome::supervisor_of(NodeId neuron) const {
  for (const auto& sc : subcores)
    if (std::find(sc.neurons.begin(), sc.neurons.end(), neuron) != sc.neurons.end()) return &sc;
  return nullptr;
}

NodeId Genome::next_id() const {
  std::uint64_t m = std::max(dxnn_id.value, core.id.value);
  for (const auto& s : core.sensors) m = std::max(m, s.id.value);
  for (const auto& a : core.actuators) m = std::max(m, a.id.value);
  for (const auto& sc : subcores) m = std::max(m, sc.id.value);
  for (const auto& n : neurons) m = std::max(m, n.id.value);
  return NodeId{m + 1};
}

std::size_t Genome::weight_count() const {
  std::size_t n = 0;
  for (const auto& nr : neurons) n += nr.weight_count();
  return n;
}

std::optional<int> Genome::source_length(NodeId source) const {
  if (const auto* s = find_sensor(source)) return s->length;
  if (const auto* sc = find_subcore(source)) return sc->output_length();
  return std::nullopt;
}

std::optional<int> route_length(const SubCoreGene& sc, const LinkSpec& link) {
  if (link.kind == LinkKind::single) return 1;
  if (link.kind == LinkKind::all) {
    int total = 0;
    for (const auto& in : sc.inputs) total += in.length;
    return total;
  }
  for (const auto& in : sc.inputs)
    if (link.from && in.from == *link.from) return in.length;
  return std::nullopt;
}

double random_weight(Rng& rng) {
  return uniform_real(rng, -std::numbers::pi / 2, std::numbers::pi / 2);
}

namespace {

struct Builder {
  Rng& rng;
  const GeneCatalog& catalog;
  Genome g;
  std::uint64_t next = 1;

  NodeId fresh() { return NodeId{next++}; }

  // A neuron's seed links: one link-type drawn per neuron; single and
  // block links are laid once per subcore input so every input is seen.
  void add_neuron(SubCoreGene& sc) {
    NeuronGene n;
    n.id = fresh();
    n.activation = catalog.activations[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(catalog.activations.size()) - 1))];
    n.learning = catalog.learnings[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(catalog.learnings.size()) - 1))];
    auto kind = static_cast<LinkKind>(uniform_int(rng, 0, 2));
    std::vector<LinkSpec> links;
    if (kind == LinkKind::all) {
      links.push_back({n.id, std::nullopt, LinkKind::all, std::nullopt});
    } else {
      for (const auto& in : sc.inputs) {
        if (kind == LinkKind::single)
          links.push_back({n.id, in.from, LinkKind::single, uniform_int(rng, 1, in.length)});
        else
          links.push_back({n.id, in.from, LinkKind::block, std::nullopt});
      }
    }
    for (const auto& l : links) {
      int len = *route_length(sc, l);
      n.inputs.push_back({sc.id, len});
      std::vector<double> w(static_cast<std::size_t>(len));
      for (auto& x : w) x = random_weight(rng);
      n.weights.push_back(std::move(w));
      sc.connected_to.push_back(l);
    }
    n.outputs.push_back(sc.id);
    sc.neurons.push_back(n.id);
    sc.connected_from.push_back(n.id);
    g.neurons.push_back(std::move(n));
  }
};

}  // namespace

Genome new_minimal_genome(std::span<const SensorSpec> sensors, std::span<const ActuatorSpec> actuators,
                          Rng& rng, const GeneCatalog& catalog) {
  if (sensors.empty()) throw ConfigError("new_minimal_genome: at least one sensor is required");
  if (actuators.empty()) throw ConfigError("new_minimal_genome: at least one actuator is required");
  if (catalog.activations.empty() || catalog.learnings.empty())
    throw ConfigError("new_minimal_genome: empty activation or learning catalog");
  for (const auto& s : sensors)
    if (s.length < 1) throw ConfigError("sensor '" + s.tag + "' has non-positive length");
  for (const auto& a : actuators)
    if (a.length < 1) throw ConfigError("actuator '" + a.tag + "' has non-positive length");

  Builder b{rng, catalog, {}};
  b.g.core.id = b.fresh();

  auto new_subcore = [&]() {
    SubCoreGene sc;
    sc.id = b.fresh();
    b.g.core.subcores.push_back(sc.id);
    return sc;
  };

  if (sensors.size() == 1 && actuators.size() == 1) {
    SubCoreGene sc = new_subcore();
    SensorLink s{b.fresh(), sc.id, sensors[0].tag, sensors[0].length};
    ActuatorLink a{b.fresh(), sc.id, actuators[0].tag, actuators[0].length};
    sc.inputs.push_back({s.id, s.length});
    sc.outputs.push_back(a.id);
    for (int i = 0; i < a.length; ++i) b.add_neuron(sc);
    b.g.core.sensors.push_back(std::move(s));
    b.g.core.actuators.push_back(std::move(a));
    b.g.subcores.push_back(std::move(sc));
  } else {
    std::vector<SubCoreGene> first, second;
    for (const auto& spec : sensors) {
      SubCoreGene sc = new_subcore();
      SensorLink s{b.fresh(), sc.id, spec.tag, spec.length};
      sc.inputs.push_back({s.id, s.length});
      b.g.core.sensors.push_back(std::move(s));
      first.push_back(std::move(sc));
    }
    for (const auto& spec : actuators) {
      SubCoreGene sc = new_subcore();
      ActuatorLink a{b.fresh(), sc.id, spec.tag, spec.length};
      sc.outputs.push_back(a.id);
      b.g.core.actuators.push_back(std::move(a));
      second.push_back(std::move(sc));
    }
    // Layer-1 subcores hold a single neuron, so each emits a length-1 vector.
    for (auto& sc : first) b.add_neuron(sc);
    for (auto& dst : second) {
      for (auto& src : first) {
        dst.inputs.push_back({src.id, src.output_length()});
        src.outputs.push_back(dst.id);
      }
    }
    for (auto& sc : second) {
      int want = b.g.find_actuator(sc.outputs.front())->length;
      for (int i = 0; i < want; ++i) b.add_neuron(sc);
    }
    for (auto& sc : first) b.g.subcores.push_back(std::move(sc));
    for (auto& sc : second) b.g.subcores.push_back(std::move(sc));
  }

  auto by_id = [](const auto& x, const auto& y) { return x.id < y.id; };
  std::sort(b.g.subcores.begin(), b.g.subcores.end(), by_id);
  std::sort(b.g.neurons.begin(), b.g.neurons.end(), by_id);
  return std::move(b.g);
}

}  // namespace dxnn
