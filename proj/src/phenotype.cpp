#include "dxnn/phenotype.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dxnn/errors.hpp"

namespace dxnn {

double activate(Activation af, double x) {
  switch (af) {
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::gaussian: return std::exp(-x * x);
    case Activation::sine: return std::sin(x);
  }
  return 0.0;
}

template <typename T>
std::vector<T> route(std::span<const RouteSource<T>> inputs, const LinkSpec& spec) {
  if (spec.kind == LinkKind::all) {
    std::vector<T> out;
    for (const auto& in : inputs) out.insert(out.end(), in.values.begin(), in.values.end());
    return out;
  }
  if (!spec.from) throw RoutingError("link to " + std::to_string(spec.to.value) + " has no source");
  auto it = std::find_if(inputs.begin(), inputs.end(), [&](const auto& in) { return in.from == *spec.from; });
  if (it == inputs.end())
    throw RoutingError("link source " + std::to_string(spec.from->value) + " is not among the subcore inputs");
  if (spec.kind == LinkKind::block) return {it->values.begin(), it->values.end()};
  if (!spec.index || *spec.index < 1 || static_cast<std::size_t>(*spec.index) > it->values.size())
    throw RoutingError("single link index out of range for source " + std::to_string(spec.from->value));
  return {it->values[static_cast<std::size_t>(*spec.index - 1)]};
}

template std::vector<double> route<double>(std::span<const RouteSource<double>>, const LinkSpec&);
template std::vector<std::uint32_t> route<std::uint32_t>(std::span<const RouteSource<std::uint32_t>>,
                                                         const LinkSpec&);

double neuron_step(NeuronState& s, std::span<const double> input) {
  const std::size_t n = s.input_length();
  if (input.size() != n)
    throw std::logic_error("neuron_step: input length " + std::to_string(input.size()) + " != expected " +
                           std::to_string(n));
  double acc = s.has_bias ? s.weights[n] : 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += s.weights[i] * input[i];
  const double out = activate(s.activation, acc);
  if (s.learning == Learning::hebbian) {
    const double lim = s.weight_limit;
    for (std::size_t i = 0; i < n; ++i)
      s.weights[i] = std::clamp(s.weights[i] + s.hebbian_rate * out * input[i], -lim, lim);
    if (s.has_bias) s.weights[n] = std::clamp(s.weights[n] + s.hebbian_rate * out, -lim, lim);
  }
  return out;
}

namespace {

using Edge = std::pair<NodeId, NodeId>;

// Depth-first walk from every node in id order. Returns reverse postorder
// and records each edge that closes a cycle.
std::vector<NodeId> schedule_graph(const std::vector<NodeId>& nodes,
                                   const std::map<NodeId, std::vector<NodeId>>& succ, std::set<Edge>& back) {
  enum class Mark { fresh, open, done };
  std::map<NodeId, Mark> mark;
  for (auto n : nodes) mark[n] = Mark::fresh;
  std::vector<NodeId> post;

  auto visit = [&](auto&& self, NodeId n) -> void {
    mark[n] = Mark::open;
    if (auto it = succ.find(n); it != succ.end()) {
      for (auto m : it->second) {
        auto mk = mark.find(m);
        if (mk == mark.end()) continue;
        if (mk->second == Mark::open)
          back.insert({n, m});
        else if (mk->second == Mark::fresh)
          self(self, m);
      }
    }
    mark[n] = Mark::done;
    post.push_back(n);
  };

  std::vector<NodeId> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  for (auto n : sorted)
    if (mark[n] == Mark::fresh) visit(visit, n);
  std::reverse(post.begin(), post.end());
  return post;
}

std::vector<NodeId> sorted_copy(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

Phenotype compile(const Genome& g) {
  if (auto report = validate(g); !report.empty())
    throw CompileError("genome " + std::to_string(g.dxnn_id.value) + " is invalid:\n" + describe(report));

  Phenotype p;

  std::map<std::string, std::size_t> sensor_offset;
  for (const auto& s : g.core.sensors) {
    if (sensor_offset.count(s.tag)) continue;
    sensor_offset[s.tag] = p.sensor_width_;
    p.sensors_.push_back({s.tag, s.length});
    p.sensor_width_ += static_cast<std::size_t>(s.length);
  }
  for (const auto& a : g.core.actuators) p.actuators_.push_back({a.tag, a.length});

  const std::size_t n = g.neurons.size();
  p.neuron_base_ = p.sensor_width_;
  p.prev_base_ = p.neuron_base_ + n;
  p.store_.assign(p.prev_base_ + n, 0.0);

  std::map<NodeId, std::uint32_t> neuron_index;
  for (std::size_t i = 0; i < n; ++i) neuron_index[g.neurons[i].id] = static_cast<std::uint32_t>(i);
  auto cur_slot = [&](NodeId id) { return static_cast<std::uint32_t>(p.neuron_base_ + neuron_index.at(id)); };
  auto prev_slot = [&](NodeId id) { return static_cast<std::uint32_t>(p.prev_base_ + neuron_index.at(id)); };

  std::vector<NodeId> subcore_ids;
  std::map<NodeId, std::vector<NodeId>> subcore_succ;
  for (const auto& sc : g.subcores) {
    subcore_ids.push_back(sc.id);
    std::vector<NodeId> next;
    for (auto o : sc.outputs)
      if (g.find_subcore(o)) next.push_back(o);
    subcore_succ[sc.id] = sorted_copy(next);
  }
  std::set<Edge> subcore_back;
  const auto subcore_order = schedule_graph(subcore_ids, subcore_succ, subcore_back);

  for (auto scid : subcore_order) {
    const auto& sc = *g.find_subcore(scid);

    std::vector<std::vector<std::uint32_t>> source_slots;
    for (const auto& in : sc.inputs) {
      std::vector<std::uint32_t> slots;
      if (const auto* s = g.find_sensor(in.from)) {
        auto base = sensor_offset.at(s->tag);
        for (int k = 0; k < s->length; ++k) slots.push_back(static_cast<std::uint32_t>(base + k));
      } else {
        const auto& src = *g.find_subcore(in.from);
        bool recurrent = subcore_back.count({src.id, sc.id}) > 0;
        for (auto nid : src.connected_from) slots.push_back(recurrent ? prev_slot(nid) : cur_slot(nid));
        if (recurrent) p.recurrent_edges_ += 1;
      }
      source_slots.push_back(std::move(slots));
    }
    std::vector<RouteSource<std::uint32_t>> sources;
    for (std::size_t i = 0; i < sc.inputs.size(); ++i) sources.push_back({sc.inputs[i].from, source_slots[i]});

    std::map<NodeId, std::vector<NodeId>> neuron_succ;
    for (auto nid : sc.neurons) {
      std::vector<NodeId> next;
      for (auto o : g.find_neuron(nid)->outputs)
        if (o != sc.id) next.push_back(o);
      neuron_succ[nid] = sorted_copy(next);
    }
    std::set<Edge> neuron_back;
    const auto neuron_order = schedule_graph(sc.neurons, neuron_succ, neuron_back);

    for (auto nid : neuron_order) {
      const auto& ng = *g.find_neuron(nid);
      Phenotype::CompiledNeuron cn;
      cn.id = nid;
      cn.state.activation = ng.activation;
      cn.state.learning = ng.learning;
      cn.state.has_bias = ng.bias.has_value();

      std::vector<const LinkSpec*> links;
      for (const auto& l : sc.connected_to)
        if (l.to == nid) links.push_back(&l);
      std::size_t link_i = 0;
      for (std::size_t i = 0; i < ng.inputs.size(); ++i) {
        const auto& in = ng.inputs[i];
        if (in.from == sc.id) {
          auto slots = route<std::uint32_t>(sources, *links[link_i++]);
          cn.gather.insert(cn.gather.end(), slots.begin(), slots.end());
        } else if (neuron_back.count({in.from, nid})) {
          cn.gather.push_back(prev_slot(in.from));
          p.recurrent_edges_ += 1;
        } else {
          cn.gather.push_back(cur_slot(in.from));
        }
        cn.state.weights.insert(cn.state.weights.end(), ng.weights[i].begin(), ng.weights[i].end());
      }
      if (ng.bias) cn.state.weights.push_back(*ng.bias);
      p.schedule_slot_.push_back(cur_slot(nid));
      p.schedule_.push_back(std::move(cn));
    }
  }

  for (const auto& a : g.core.actuators) {
    Phenotype::ActuatorRoute r;
    r.length = a.length;
    const auto& sc = *g.find_subcore(a.subcore);
    for (auto nid : sc.connected_from) {
      if (static_cast<int>(r.slots.size()) == a.length) break;
      r.slots.push_back(cur_slot(nid));
    }
    p.actuator_routes_.push_back(std::move(r));
  }

  std::size_t widest = 0;
  for (const auto& cn : p.schedule_) {
    widest = std::max(widest, cn.gather.size());
    p.initial_weights_.push_back(cn.state.weights);
  }
  p.scratch_.resize(widest);
  return p;
}

std::size_t Phenotype::actuator_width() const {
  std::size_t w = 0;
  for (const auto& a : actuators_) w += static_cast<std::size_t>(a.length);
  return w;
}

void Phenotype::cycle_into(std::span<const double> sensors, std::span<double> actuators) {
  if (sensors.size() != sensor_width_)
    throw InputError("expected " + std::to_string(sensor_width_) + " sensor values, got " +
                     std::to_string(sensors.size()));
  if (actuators.size() != actuator_width())
    throw InputError("actuator buffer has " + std::to_string(actuators.size()) + " slots, expected " +
                     std::to_string(actuator_width()));
  std::copy(sensors.begin(), sensors.end(), store_.begin());

  for (std::size_t i = 0; i < schedule_.size(); ++i) {
    auto& cn = schedule_[i];
    const std::size_t len = cn.gather.size();
    for (std::size_t k = 0; k < len; ++k) scratch_[k] = store_[cn.gather[k]];
    store_[schedule_slot_[i]] = neuron_step(cn.state, std::span<const double>(scratch_.data(), len));
  }

  std::size_t at = 0;
  for (const auto& r : actuator_routes_) {
    for (int k = 0; k < r.length; ++k)
      actuators[at + static_cast<std::size_t>(k)] =
          static_cast<std::size_t>(k) < r.slots.size() ? store_[r.slots[static_cast<std::size_t>(k)]] : 0.0;
    at += static_cast<std::size_t>(r.length);
  }

  std::copy(store_.begin() + static_cast<std::ptrdiff_t>(neuron_base_),
            store_.begin() + static_cast<std::ptrdiff_t>(prev_base_),
            store_.begin() + static_cast<std::ptrdiff_t>(prev_base_));
}

Phenotype::NamedVectors Phenotype::cycle(const NamedVectors& sensors) {
  std::vector<double> flat;
  flat.reserve(sensor_width_);
  for (const auto& spec : sensors_) {
    auto it = std::find_if(sensors.begin(), sensors.end(), [&](const auto& kv) { return kv.first == spec.tag; });
    if (it == sensors.end()) throw InputError("missing sensor vector '" + spec.tag + "'");
    if (static_cast<int>(it->second.size()) != spec.length)
      throw InputError("sensor '" + spec.tag + "' expects length " + std::to_string(spec.length) + ", got " +
                       std::to_string(it->second.size()));
    flat.insert(flat.end(), it->second.begin(), it->second.end());
  }
  std::vector<double> out(actuator_width());
  cycle_into(flat, out);

  NamedVectors result;
  std::size_t at = 0;
  for (const auto& a : actuators_) {
    auto len = static_cast<std::size_t>(a.length);
    result.emplace_back(a.tag, std::vector<double>(out.begin() + static_cast<std::ptrdiff_t>(at),
                                                   out.begin() + static_cast<std::ptrdiff_t>(at + len)));
    at += len;
  }
  return result;
}

void Phenotype::reset() {
  std::fill(store_.begin(), store_.end(), 0.0);
  for (std::size_t i = 0; i < schedule_.size(); ++i) schedule_[i].state.weights = initial_weights_[i];
}

}  // namespace dxnn
