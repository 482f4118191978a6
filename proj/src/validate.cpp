#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dxnn/genome.hpp"

namespace dxnn {

namespace {

std::string id_str(NodeId id) { return std::to_string(id.value); }

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

class Checker {
 public:
  explicit Checker(const Genome& g) : g_(g) {}

  ValidationReport run() {
    check_ids();
    check_core();
    for (const auto& sc : g_.subcores) check_subcore(sc);
    for (const auto& n : g_.neurons) check_neuron(n);
    check_generations();
    return std::move(report_);
  }

 private:
  void fail(NodeId id, std::string msg) { report_.push_back({id, std::move(msg)}); }

  void check_ids() {
    std::set<NodeId> seen;
    auto note = [&](NodeId id, const char* what) {
      if (!seen.insert(id).second) fail(id, std::string("duplicate element id (") + what + ")");
    };
    note(g_.core.id, "core");
    for (const auto& s : g_.core.sensors) note(s.id, "sensor");
    for (const auto& a : g_.core.actuators) note(a.id, "actuator");
    for (const auto& sc : g_.subcores) note(sc.id, "subcore");
    for (const auto& n : g_.neurons) note(n.id, "neuron");
    auto sorted = [](const auto& v) {
      return std::is_sorted(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    };
    if (!sorted(g_.subcores)) fail(g_.core.id, "subcores are not stored in id order");
    if (!sorted(g_.neurons)) fail(g_.core.id, "neurons are not stored in id order");
  }

  void check_core() {
    const auto& core = g_.core;
    if (core.sensors.empty()) fail(core.id, "core has no sensor");
    if (core.actuators.empty()) fail(core.id, "core has no actuator");

    std::set<NodeId> listed;
    for (auto id : core.subcores) {
      if (!listed.insert(id).second) fail(core.id, "subcore " + id_str(id) + " supervised twice");
      if (!g_.find_subcore(id)) fail(core.id, "supervised subcore " + id_str(id) + " does not exist");
    }
    for (const auto& sc : g_.subcores)
      if (!listed.count(sc.id)) fail(sc.id, "subcore is not supervised by the core");

    for (const auto& s : core.sensors) {
      if (s.length < 1) fail(s.id, "sensor '" + s.tag + "' has non-positive length");
      if (!listed.count(s.subcore)) {
        fail(s.id, "sensor '" + s.tag + "' targets unsupervised subcore " + id_str(s.subcore));
        continue;
      }
      const auto* sc = g_.find_subcore(s.subcore);
      if (!sc) continue;
      bool ok = std::any_of(sc->inputs.begin(), sc->inputs.end(),
                            [&](const InputEntry& in) { return in.from == s.id && in.length == s.length; });
      if (!ok) fail(s.id, "sensor '" + s.tag + "' is not an input of subcore " + id_str(s.subcore));
    }

    std::map<std::string, int> sensor_lengths;
    for (const auto& s : core.sensors) {
      auto [it, fresh] = sensor_lengths.emplace(s.tag, s.length);
      if (!fresh && it->second != s.length) fail(s.id, "sensor '" + s.tag + "' used with two different lengths");
    }

    std::set<std::string> actuator_tags;
    for (const auto& a : core.actuators) {
      if (a.length < 1) fail(a.id, "actuator '" + a.tag + "' has non-positive length");
      if (!actuator_tags.insert(a.tag).second) fail(a.id, "actuator '" + a.tag + "' listed twice");
      if (!listed.count(a.subcore)) {
        fail(a.id, "actuator '" + a.tag + "' fed by unsupervised subcore " + id_str(a.subcore));
        continue;
      }
      const auto* sc = g_.find_subcore(a.subcore);
      if (sc && !contains(sc->outputs, a.id))
        fail(a.id, "actuator '" + a.tag + "' is not an output of subcore " + id_str(a.subcore));
    }
  }

  void check_subcore(const SubCoreGene& sc) {
    if (sc.kind != SubCoreKind::neural) {
      fail(sc.id, std::string("unsupported kind '") + to_string(sc.kind) + "'");
    }
    if (sc.inputs.empty()) fail(sc.id, "subcore has no inputs");
    if (sc.outputs.empty()) fail(sc.id, "subcore has no outputs");
    if (sc.connected_from.empty()) fail(sc.id, "subcore output vector is empty");

    std::set<NodeId> sources;
    for (const auto& in : sc.inputs) {
      if (!sources.insert(in.from).second) fail(sc.id, "input from " + id_str(in.from) + " listed twice");
      if (const auto* s = g_.find_sensor(in.from)) {
        if (s->subcore != sc.id) fail(sc.id, "sensor port " + id_str(in.from) + " belongs to another subcore");
        if (s->length != in.length) fail(sc.id, "input length from sensor " + id_str(in.from) + " mismatches");
      } else if (const auto* src = g_.find_subcore(in.from)) {
        if (!contains(src->outputs, sc.id))
          fail(sc.id, "input from subcore " + id_str(in.from) + " is not in its output list");
        if (src->output_length() != in.length)
          fail(sc.id, "input length from subcore " + id_str(in.from) + " mismatches its output vector");
      } else {
        fail(sc.id, "input from unknown node " + id_str(in.from));
      }
    }

    std::set<NodeId> outs;
    for (auto out : sc.outputs) {
      if (!outs.insert(out).second) fail(sc.id, "output to " + id_str(out) + " listed twice");
      if (const auto* a = g_.find_actuator(out)) {
        if (a->subcore != sc.id) fail(sc.id, "actuator " + id_str(out) + " is fed by another subcore");
      } else if (const auto* dst = g_.find_subcore(out)) {
        bool ok = std::any_of(dst->inputs.begin(), dst->inputs.end(),
                              [&](const InputEntry& in) { return in.from == sc.id; });
        if (!ok) fail(sc.id, "output subcore " + id_str(out) + " does not list this subcore as input");
      } else {
        fail(sc.id, "output to unknown node " + id_str(out));
      }
    }

    std::set<NodeId> own;
    for (auto nid : sc.neurons) {
      if (!own.insert(nid).second) fail(sc.id, "neuron " + id_str(nid) + " supervised twice");
      if (!g_.find_neuron(nid)) fail(sc.id, "supervised neuron " + id_str(nid) + " does not exist");
      owner_[nid].push_back(sc.id);
    }

    for (const auto& link : sc.connected_to) {
      if (!own.count(link.to)) fail(sc.id, "link targets non-supervised node " + id_str(link.to));
      switch (link.kind) {
        case LinkKind::single:
        case LinkKind::block: {
          if (!link.from) {
            fail(sc.id, std::string(to_string(link.kind)) + " link to " + id_str(link.to) + " lacks a source");
            break;
          }
          auto it = std::find_if(sc.inputs.begin(), sc.inputs.end(),
                                 [&](const InputEntry& in) { return in.from == *link.from; });
          if (it == sc.inputs.end()) {
            fail(sc.id, "link source " + id_str(*link.from) + " is not a subcore input");
            break;
          }
          if (link.kind == LinkKind::single) {
            if (!link.index || *link.index < 1 || *link.index > it->length)
              fail(sc.id, "single link to " + id_str(link.to) + " has an out-of-range index");
          } else if (link.index) {
            fail(sc.id, "block link to " + id_str(link.to) + " carries an index");
          }
          break;
        }
        case LinkKind::all:
          if (link.from || link.index) fail(sc.id, "all link to " + id_str(link.to) + " carries a source or index");
          break;
      }
    }

    std::set<NodeId> out_neurons;
    for (auto nid : sc.connected_from) {
      if (!own.count(nid)) fail(sc.id, "output vector names non-supervised neuron " + id_str(nid));
      if (!out_neurons.insert(nid).second) fail(sc.id, "output vector names neuron " + id_str(nid) + " twice");
    }
  }

  void check_neuron(const NeuronGene& n) {
    auto own = owner_.find(n.id);
    if (own == owner_.end()) {
      fail(n.id, "neuron has no supervising subcore");
      return;
    }
    if (own->second.size() > 1) fail(n.id, "neuron supervised by more than one subcore");
    const auto* sc = g_.find_subcore(own->second.front());
    if (!sc) return;

    if (n.inputs.empty()) fail(n.id, "neuron has no inputs");
    if (n.outputs.empty()) fail(n.id, "neuron has no outputs");
    if (n.weights.size() != n.inputs.size()) {
      fail(n.id, "weight list has " + std::to_string(n.weights.size()) + " vectors for " +
                     std::to_string(n.inputs.size()) + " inputs");
    }

    std::vector<const LinkSpec*> routes;
    for (const auto& l : sc->connected_to)
      if (l.to == n.id) routes.push_back(&l);

    std::size_t route_i = 0;
    std::set<NodeId> neuron_sources;
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      const auto& in = n.inputs[i];
      if (i < n.weights.size() && static_cast<int>(n.weights[i].size()) != in.length) {
        fail(n.id, "weight vector " + std::to_string(i) + " has length " + std::to_string(n.weights[i].size()) +
                       ", expected " + std::to_string(in.length));
      }
      if (in.from == sc->id) {
        if (route_i >= routes.size()) {
          fail(n.id, "more subcore inputs than routes");
        } else {
          auto len = route_length(*sc, *routes[route_i]);
          if (len && *len != in.length) fail(n.id, "input " + std::to_string(i) + " length mismatches its route");
        }
        ++route_i;
      } else if (const auto* src = g_.find_neuron(in.from)) {
        if (!contains(sc->neurons, in.from)) fail(n.id, "input from neuron " + id_str(in.from) + " in another subcore");
        if (in.length != 1) fail(n.id, "neuron-to-neuron input must have length 1");
        if (!contains(src->outputs, n.id)) fail(n.id, "source neuron " + id_str(in.from) + " does not list this output");
        if (!neuron_sources.insert(in.from).second) fail(n.id, "duplicate input from neuron " + id_str(in.from));
      } else {
        fail(n.id, "input from unknown node " + id_str(in.from));
      }
    }
    if (route_i < routes.size()) fail(n.id, "routes without a matching input entry");

    for (auto out : n.outputs) {
      if (out == sc->id) {
        if (!contains(sc->connected_from, n.id)) fail(n.id, "outputs to subcore but not in its output vector");
      } else if (const auto* dst = g_.find_neuron(out)) {
        if (!contains(sc->neurons, out)) fail(n.id, "output to neuron " + id_str(out) + " in another subcore");
        bool ok = std::any_of(dst->inputs.begin(), dst->inputs.end(),
                              [&](const InputEntry& in) { return in.from == n.id; });
        if (!ok) fail(n.id, "target neuron " + id_str(out) + " does not list this input");
      } else {
        fail(n.id, "output to unknown node " + id_str(out));
      }
    }
    if (contains(sc->connected_from, n.id) && !contains(n.outputs, sc->id))
      fail(n.id, "in subcore output vector but does not output to it");

    for (const auto& w : n.weights)
      for (double x : w)
        if (!std::isfinite(x)) fail(n.id, "non-finite weight");
    if (n.bias && !std::isfinite(*n.bias)) fail(n.id, "non-finite bias");
  }

  void check_generations() {
    int top = 0;
    for (const auto& sc : g_.subcores) top = std::max(top, sc.generation);
    for (const auto& n : g_.neurons) top = std::max(top, n.generation);
    for (const auto& sc : g_.subcores)
      if (sc.generation < 0) fail(sc.id, "negative generation");
    for (const auto& n : g_.neurons)
      if (n.generation < 0) fail(n.id, "negative generation");
    if (g_.core.generation != top)
      fail(g_.core.id, "core generation " + std::to_string(g_.core.generation) +
                           " differs from newest element generation " + std::to_string(top));
  }

  const Genome& g_;
  ValidationReport report_;
  std::map<NodeId, std::vector<NodeId>> owner_;
};

}  // namespace

ValidationReport validate(const Genome& g) { return Checker(g).run(); }

std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report) os << "  [" << v.element.value << "] " << v.message << "\n";
  return os.str();
}

}  // namespace dxnn
