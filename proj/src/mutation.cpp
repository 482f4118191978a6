#include "dxnn/mutation.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dxnn/errors.hpp"

namespace dxnn {

std::string_view to_string(MutationOperator op) {
  switch (op) {
    case MutationOperator::add_neuron: return "add_neuron";
    case MutationOperator::add_link: return "add_link";
    case MutationOperator::splice_neuron: return "splice_neuron";
    case MutationOperator::change_af: return "change_af";
    case MutationOperator::change_lm: return "change_lm";
    case MutationOperator::add_bias: return "add_bias";
    case MutationOperator::add_subcore: return "add_subcore";
    case MutationOperator::add_subcore_link: return "add_subcore_link";
    case MutationOperator::splice_subcore: return "splice_subcore";
  }
  return "?";
}

std::optional<MutationOperator> parse_mutation_operator(std::string_view s) {
  for (auto op : kAllOperators)
    if (s == to_string(op)) return op;
  return std::nullopt;
}

bool is_subcore_level(MutationOperator op) {
  return op == MutationOperator::add_subcore || op == MutationOperator::add_subcore_link ||
         op == MutationOperator::splice_subcore;
}

int mo_count(const Genome& parent, Rng& rng) { return uniform_int(rng, 1, rim_bound(parent.neuron_count())); }

bool subcore_ops_enabled(const Genome& g, const MutationContext& ctx) {
  if (g.subcores.empty()) return false;
  return static_cast<double>(g.neurons.size()) / static_cast<double>(g.subcores.size()) > ctx.k_ratio;
}

std::vector<MutationOperator> available_operators(const Genome& g, const MutationContext& ctx) {
  const bool level2 = subcore_ops_enabled(g, ctx);
  std::vector<MutationOperator> ops;
  for (auto op : kAllOperators)
    if (level2 || !is_subcore_level(op)) ops.push_back(op);
  return ops;
}

namespace {

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string id_str(NodeId id) { return std::to_string(id.value); }

class Mutator {
 public:
  Mutator(const Genome& g, const MutationContext& ctx, Rng& rng)
      : g_(g), ctx_(ctx), rng_(rng), gen_(g.core.generation) {}

  std::optional<Genome> run(MutationOperator op) {
    bool ok = false;
    switch (op) {
      case MutationOperator::add_neuron: ok = add_neuron(); break;
      case MutationOperator::add_link: ok = add_link(); break;
      case MutationOperator::splice_neuron: ok = splice_neuron(); break;
      case MutationOperator::change_af: ok = change_af(); break;
      case MutationOperator::change_lm: ok = change_lm(); break;
      case MutationOperator::add_bias: ok = add_bias(); break;
      case MutationOperator::add_subcore: ok = add_subcore(); break;
      case MutationOperator::add_subcore_link: ok = add_subcore_link(); break;
      case MutationOperator::splice_subcore: ok = splice_subcore(); break;
    }
    if (!ok) return std::nullopt;
    g_.core.history.push_back({std::string(to_string(op)), element_, info_});
    return std::move(g_);
  }

 private:
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<int>(n) - 1)); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }
  bool coin() { return uniform_int(rng_, 0, 1) == 1; }

  NodeId fresh() const { return g_.next_id(); }
  SubCoreGene& sc(NodeId id) { return *g_.find_subcore(id); }
  NeuronGene& nr(NodeId id) { return *g_.find_neuron(id); }

  void touch_subcore(NodeId id) { sc(id).generation = gen_; }
  void touch_neuron(NodeId id) {
    nr(id).generation = gen_;
    touch_subcore(g_.supervisor_of(id)->id);
  }

  bool feeds_actuator(const SubCoreGene& s) const {
    return std::any_of(s.outputs.begin(), s.outputs.end(), [&](NodeId o) { return g_.find_actuator(o) != nullptr; });
  }

  bool linked(NodeId from, NodeId to) {
    const auto& ins = nr(to).inputs;
    return std::any_of(ins.begin(), ins.end(), [&](const InputEntry& in) { return in.from == from; });
  }

  std::vector<double> random_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = random_weight(rng_);
    return w;
  }

  NodeId new_subcore() {
    SubCoreGene s;
    s.id = fresh();
    s.generation = gen_;
    g_.core.subcores.push_back(s.id);
    g_.subcores.push_back(std::move(s));  // largest id, so storage stays sorted
    return g_.subcores.back().id;
  }

  NodeId new_neuron(NodeId sc_id) {
    NeuronGene n;
    n.id = fresh();
    n.activation = pick(ctx_.catalog.activations);
    n.learning = pick(ctx_.catalog.learnings);
    n.generation = gen_;
    const NodeId id = n.id;
    g_.neurons.push_back(std::move(n));
    sc(sc_id).neurons.push_back(id);
    touch_subcore(sc_id);
    return id;
  }

  LinkSpec random_route(NodeId sc_id, NodeId to) {
    const auto& s = sc(sc_id);
    auto kind = static_cast<LinkKind>(uniform_int(rng_, 0, 2));
    if (kind == LinkKind::all) return {to, std::nullopt, LinkKind::all, std::nullopt};
    const auto& in = pick(s.inputs);
    if (kind == LinkKind::single) return {to, in.from, LinkKind::single, uniform_int(rng_, 1, in.length)};
    return {to, in.from, LinkKind::block, std::nullopt};
  }

  void add_route(NodeId sc_id, const LinkSpec& link) {
    auto& s = sc(sc_id);
    const int len = *route_length(s, link);
    s.connected_to.push_back(link);
    auto& n = nr(link.to);
    n.inputs.push_back({sc_id, len});
    n.weights.push_back(random_weights(len));
    touch_neuron(link.to);
  }

  void link_neurons(NodeId a, NodeId b) {
    nr(a).outputs.push_back(b);
    auto& nb = nr(b);
    nb.inputs.push_back({a, 1});
    nb.weights.push_back({random_weight(rng_)});
    touch_neuron(a);
    touch_neuron(b);
  }

  void join_output(NodeId sc_id, NodeId n) {
    nr(n).outputs.push_back(sc_id);
    sc(sc_id).connected_from.push_back(n);
  }

  // Index of the k-th input entry of `n` that comes from subcore `s`.
  static std::size_t route_entry(const NeuronGene& n, NodeId s, std::size_t k) {
    for (std::size_t i = 0; i < n.inputs.size(); ++i)
      if (n.inputs[i].from == s && k-- == 0) return i;
    throw MutationError("route without matching input entry");
  }

  // Visit every link of `d` together with the input entry it feeds.
  template <typename F>
  void for_each_route(NodeId d, F&& f) {
    std::map<NodeId, std::size_t> seen;
    const auto links = sc(d).connected_to;
    for (const auto& link : links) {
      const std::size_t k = seen[link.to]++;
      f(link, route_entry(nr(link.to), d, k));
    }
  }

  // The `src` entry of `d` grew by one trailing element: widen the block
  // and all-type views of it.
  void widen_input(NodeId d, NodeId src) {
    int offset = 0, old_len = 0;
    for (auto& in : sc(d).inputs) {
      if (in.from == src) {
        old_len = in.length++;
        break;
      }
      offset += in.length;
    }
    for_each_route(d, [&](const LinkSpec& link, std::size_t e) {
      const bool block = link.kind == LinkKind::block && link.from == src;
      if (!block && link.kind != LinkKind::all) return;
      auto& n = nr(link.to);
      const int at = block ? old_len : offset + old_len;
      n.weights[e].insert(n.weights[e].begin() + at, random_weight(rng_));
      n.inputs[e].length += 1;
      touch_neuron(link.to);
    });
    touch_subcore(d);
  }

  // Neuron `n` joins the output vector of its subcore; downstream
  // subcores see a longer vector.
  void grow_output(NodeId sc_id, NodeId n) {
    join_output(sc_id, n);
    touch_neuron(n);
    for (auto out : std::vector<NodeId>(sc(sc_id).outputs))
      if (g_.find_subcore(out)) widen_input(out, sc_id);
  }

  // New input vector for `d`: all-type views grow at the end and one
  // random neuron reads it directly.
  void append_input(NodeId d, NodeId src, int len) {
    sc(d).inputs.push_back({src, len});
    for_each_route(d, [&](const LinkSpec& link, std::size_t e) {
      if (link.kind != LinkKind::all) return;
      auto& n = nr(link.to);
      auto extra = random_weights(len);
      n.weights[e].insert(n.weights[e].end(), extra.begin(), extra.end());
      n.inputs[e].length += len;
      touch_neuron(link.to);
    });
    touch_subcore(d);
    const NodeId target = pick(sc(d).neurons);
    if (coin())
      add_route(d, {target, src, LinkKind::block, std::nullopt});
    else
      add_route(d, {target, src, LinkKind::single, uniform_int(rng_, 1, len)});
  }

  // ---- neuron level ----

  bool add_neuron() {
    std::vector<NodeId> subcores;
    for (const auto& s : g_.subcores) subcores.push_back(s.id);
    if (subcores.empty()) return false;
    const NodeId s = pick(subcores);
    const auto members = sc(s).neurons;
    if (members.empty()) return false;
    const bool may_output = !feeds_actuator(sc(s));
    const NodeId n = new_neuron(s);
    // Input always comes from the subcore's own routes.
    add_route(s, random_route(s, n));
    if (may_output && coin())
      grow_output(s, n);
    else
      link_neurons(n, pick(members));
    element_ = n;
    info_ = "in subcore " + id_str(s);
    return true;
  }

  bool add_link() {
    std::vector<std::pair<NodeId, NodeId>> neuron_links;
    std::vector<std::pair<NodeId, LinkSpec>> routes;
    std::vector<std::pair<NodeId, NodeId>> outputs;
    for (const auto& s : g_.subcores) {
      const bool may_output = !feeds_actuator(s);
      for (auto a : s.neurons) {
        for (auto b : s.neurons)
          if (!linked(a, b)) neuron_links.emplace_back(a, b);
        auto offer = [&](const LinkSpec& l) {
          if (!contains(s.connected_to, l)) routes.emplace_back(s.id, l);
        };
        offer({a, std::nullopt, LinkKind::all, std::nullopt});
        for (const auto& in : s.inputs) {
          offer({a, in.from, LinkKind::block, std::nullopt});
          for (int i = 1; i <= in.length; ++i) offer({a, in.from, LinkKind::single, i});
        }
        if (may_output && !contains(s.connected_from, a)) outputs.emplace_back(s.id, a);
      }
    }
    std::vector<int> forms;
    if (!neuron_links.empty()) forms.push_back(0);
    if (!routes.empty()) forms.push_back(1);
    if (!outputs.empty()) forms.push_back(2);
    if (forms.empty()) return false;
    switch (pick(forms)) {
      case 0: {
        auto [a, b] = pick(neuron_links);
        link_neurons(a, b);
        element_ = b;
        info_ = "from neuron " + id_str(a);
        break;
      }
      case 1: {
        auto [s, l] = pick(routes);
        add_route(s, l);
        element_ = l.to;
        info_ = std::string(to_string(l.kind)) + " route from subcore " + id_str(s);
        break;
      }
      default: {
        auto [s, a] = pick(outputs);
        grow_output(s, a);
        element_ = a;
        info_ = "to output of subcore " + id_str(s);
        break;
      }
    }
    return true;
  }

  bool splice_neuron() {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& b : g_.neurons)
      for (const auto& in : b.inputs)
        if (in.from != b.id && g_.find_neuron(in.from)) edges.emplace_back(in.from, b.id);
    if (edges.empty()) return false;
    const auto [a, b] = pick(edges);
    const NodeId s = g_.supervisor_of(a)->id;
    const NodeId n = new_neuron(s);
    for (auto& o : nr(a).outputs)
      if (o == b) o = n;
    for (auto& in : nr(b).inputs)
      if (in.from == a) in.from = n;
    auto& mid = nr(n);
    mid.inputs.push_back({a, 1});
    mid.weights.push_back({random_weight(rng_)});
    mid.outputs.push_back(b);
    touch_neuron(a);
    touch_neuron(b);
    touch_neuron(n);
    element_ = n;
    info_ = "between " + id_str(a) + " and " + id_str(b);
    return true;
  }

  template <typename T, typename Get>
  bool redraw(const std::vector<T>& catalog, Get get) {
    std::vector<std::pair<NodeId, std::vector<T>>> options;
    for (auto& n : g_.neurons) {
      std::vector<T> alt;
      for (auto v : catalog)
        if (v != get(n) && !contains(alt, v)) alt.push_back(v);
      if (!alt.empty()) options.emplace_back(n.id, std::move(alt));
    }
    if (options.empty()) return false;
    const auto& [id, alt] = pick(options);
    auto& n = nr(id);
    const T before = get(n);
    get(n) = pick(alt);
    touch_neuron(id);
    element_ = id;
    info_ = std::string(to_string(before)) + " -> " + to_string(get(n));
    return true;
  }

  bool change_af() {
    return redraw(ctx_.catalog.activations, [](NeuronGene& n) -> Activation& { return n.activation; });
  }

  bool change_lm() {
    return redraw(ctx_.catalog.learnings, [](NeuronGene& n) -> Learning& { return n.learning; });
  }

  bool add_bias() {
    std::vector<NodeId> ids;
    for (const auto& n : g_.neurons)
      if (!n.bias) ids.push_back(n.id);
    if (ids.empty()) return false;
    const NodeId id = pick(ids);
    nr(id).bias = random_weight(rng_);
    touch_neuron(id);
    element_ = id;
    info_ = "bias";
    return true;
  }

  // ---- subcore level ----

  std::vector<SensorSpec> unused_sensors() const {
    std::vector<SensorSpec> out;
    for (const auto& spec : ctx_.available_sensors) {
      bool used = std::any_of(g_.core.sensors.begin(), g_.core.sensors.end(),
                              [&](const SensorLink& s) { return s.tag == spec.tag; });
      if (!used) out.push_back(spec);
    }
    return out;
  }

  std::vector<ActuatorSpec> unused_actuators() const {
    std::vector<ActuatorSpec> out;
    for (const auto& spec : ctx_.available_actuators) {
      bool used = std::any_of(g_.core.actuators.begin(), g_.core.actuators.end(),
                              [&](const ActuatorLink& a) { return a.tag == spec.tag; });
      if (!used) out.push_back(spec);
    }
    return out;
  }

  bool receives_tag(const SubCoreGene& s, const std::string& tag) const {
    return std::any_of(s.inputs.begin(), s.inputs.end(), [&](const InputEntry& in) {
      const auto* p = g_.find_sensor(in.from);
      return p && p->tag == tag;
    });
  }

  NodeId connect_sensor(const SensorSpec& spec, NodeId d) {
    const NodeId port = fresh();
    g_.core.sensors.push_back({port, d, spec.tag, spec.length});
    return port;
  }

  NodeId connect_actuator(const ActuatorSpec& spec, NodeId s) {
    const NodeId port = fresh();
    g_.core.actuators.push_back({port, s, spec.tag, spec.length});
    sc(s).outputs.push_back(port);
    touch_subcore(s);
    return port;
  }

  // One neuron per output element, each reading the subcore input
  // through a random route.
  void populate(NodeId s, int count) {
    for (int i = 0; i < count; ++i) {
      const NodeId n = new_neuron(s);
      add_route(s, random_route(s, n));
      join_output(s, n);
    }
  }

  bool add_subcore() {
    std::vector<NodeId> existing;
    for (const auto& s : g_.subcores) existing.push_back(s.id);
    const auto free_actuators = unused_actuators();
    const NodeId n = new_subcore();

    if (!ctx_.available_sensors.empty() && (existing.empty() || coin())) {
      const auto& spec = pick(ctx_.available_sensors);
      const NodeId port = connect_sensor(spec, n);
      sc(n).inputs.push_back({port, spec.length});
      info_ = "from sensor '" + spec.tag + "'";
    } else {
      if (existing.empty()) return false;
      const NodeId src = pick(existing);
      sc(src).outputs.push_back(n);
      touch_subcore(src);
      sc(n).inputs.push_back({src, sc(src).output_length()});
      info_ = "from subcore " + id_str(src);
    }
    populate(n, 1);

    if (!free_actuators.empty() && (existing.empty() || coin())) {
      const auto& spec = pick(free_actuators);
      connect_actuator(spec, n);
      info_ += " to actuator '" + spec.tag + "'";
    } else {
      if (existing.empty()) return false;
      const NodeId dst = pick(existing);
      sc(n).outputs.push_back(dst);
      append_input(dst, n, 1);
      info_ += " to subcore " + id_str(dst);
    }
    element_ = n;
    return true;
  }

  // Sensors or actuators the genome has never used take precedence;
  // otherwise a used sensor feeds another subcore or two subcores link.
  bool add_subcore_link() {
    std::vector<NodeId> ids;
    for (const auto& s : g_.subcores) ids.push_back(s.id);
    if (ids.empty()) return false;
    const auto new_sensors = unused_sensors();
    const auto new_actuators = unused_actuators();

    if (!new_sensors.empty() || !new_actuators.empty()) {
      if (!new_sensors.empty() && (new_actuators.empty() || coin())) {
        const auto& spec = pick(new_sensors);
        const NodeId d = pick(ids);
        append_input(d, connect_sensor(spec, d), spec.length);
        element_ = d;
        info_ = "from new sensor '" + spec.tag + "'";
      } else {
        const auto& spec = pick(new_actuators);
        const NodeId s = pick(ids);
        connect_actuator(spec, s);
        element_ = s;
        info_ = "to new actuator '" + spec.tag + "'";
      }
      return true;
    }

    std::vector<std::pair<const SensorSpec*, NodeId>> sensor_links;
    std::vector<std::pair<NodeId, NodeId>> subcore_links;
    for (const auto& d : g_.subcores) {
      for (const auto& spec : ctx_.available_sensors)
        if (!receives_tag(d, spec.tag)) sensor_links.emplace_back(&spec, d.id);
      for (const auto& s : g_.subcores)
        if (s.id != d.id && !contains(s.outputs, d.id)) subcore_links.emplace_back(s.id, d.id);
    }
    if (sensor_links.empty() && subcore_links.empty()) return false;
    if (!sensor_links.empty() && (subcore_links.empty() || coin())) {
      const auto [spec, d] = pick(sensor_links);
      append_input(d, connect_sensor(*spec, d), spec->length);
      element_ = d;
      info_ = "from sensor '" + spec->tag + "'";
    } else {
      const auto [s, d] = pick(subcore_links);
      sc(s).outputs.push_back(d);
      touch_subcore(s);
      append_input(d, s, sc(s).output_length());
      element_ = d;
      info_ = "from subcore " + id_str(s);
    }
    return true;
  }

  bool splice_subcore() {
    std::vector<std::pair<NodeId, NodeId>> edges;  // (source, subcore)
    for (const auto& y : g_.subcores)
      for (const auto& in : y.inputs)
        if (in.from != y.id) edges.emplace_back(in.from, y.id);
    if (edges.empty()) return false;
    const auto [x, y] = pick(edges);
    int len = 0;
    for (const auto& in : sc(y).inputs)
      if (in.from == x) len = in.length;

    const NodeId n = new_subcore();
    sc(n).inputs.push_back({x, len});
    sc(n).outputs.push_back(y);
    bool from_sensor = false;
    for (auto& p : g_.core.sensors) {
      if (p.id == x) {
        p.subcore = n;
        from_sensor = true;
      }
    }
    if (!from_sensor) {
      for (auto& o : sc(x).outputs)
        if (o == y) o = n;
      touch_subcore(x);
    }
    auto& ys = sc(y);
    for (auto& in : ys.inputs)
      if (in.from == x) in.from = n;
    for (auto& l : ys.connected_to)
      if (l.from == x) l.from = n;
    touch_subcore(y);
    populate(n, len);
    element_ = n;
    info_ = "between " + id_str(x) + " and " + id_str(y);
    return true;
  }

  Genome g_;
  const MutationContext& ctx_;
  Rng& rng_;
  int gen_;
  NodeId element_;
  std::string info_;
};

}  // namespace

std::optional<Genome> apply_operator(const Genome& g, MutationOperator op, const MutationContext& ctx, Rng& rng) {
  if (ctx.catalog.activations.empty() || ctx.catalog.learnings.empty())
    throw ConfigError("mutation: empty activation or learning catalog");
  return Mutator(g, ctx, rng).run(op);
}

Genome mutate_offspring(const Genome& parent, NodeId child_id, const MutationContext& ctx, Rng& rng) {
  Genome child = parent;
  child.dxnn_id = child_id;
  child.core.generation += 1;
  const int count = mo_count(parent, rng);
  int applied = 0;
  for (int slot = 0; slot < count; ++slot) {
    for (int attempt = 0; attempt <= ctx.max_redraws; ++attempt) {
      const auto ops = available_operators(child, ctx);
      const auto op = ops[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(ops.size()) - 1))];
      if (auto next = apply_operator(child, op, ctx, rng)) {
        child = std::move(*next);
        ++applied;
        break;
      }
    }
  }
  if (applied == 0) throw MutationError("no mutation operator could be applied to genome " + id_str(parent.dxnn_id));
  return child;
}

}  // namespace dxnn
