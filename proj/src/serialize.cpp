#include "dxnn/serialize.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "dxnn/errors.hpp"

namespace dxnn {

namespace {

// ---- writing ----

void put_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void put_id(std::string& out, NodeId id) { out += std::to_string(id.value); }

void put_quoted(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  out += '"';
}

template <typename T, typename F>
void put_list(std::string& out, const std::vector<T>& v, F&& each) {
  out += '(';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    each(v[i]);
  }
  out += ')';
}

void put_ids(std::string& out, const std::vector<NodeId>& ids) {
  put_list(out, ids, [&](NodeId id) { put_id(out, id); });
}

void put_params(std::string& out, const ParameterList& ps) {
  put_list(out, ps, [&](const auto& kv) {
    out += '(';
    put_quoted(out, kv.first);
    out += ' ';
    put_quoted(out, kv.second);
    out += ')';
  });
}

void put_inputs(std::string& out, const std::vector<InputEntry>& ins) {
  put_list(out, ins, [&](const InputEntry& in) {
    out += '(';
    put_id(out, in.from);
    out += ' ' + std::to_string(in.length) + ')';
  });
}

void write_core(std::string& out, const CoreGene& c) {
  out += "(core ";
  put_id(out, c.id);
  out += ' ';
  auto port = [&](NodeId id, NodeId sc, const std::string& tag, int len) {
    out += '(';
    put_id(out, id);
    out += ' ';
    put_id(out, sc);
    out += ' ';
    put_quoted(out, tag);
    out += ' ' + std::to_string(len) + ')';
  };
  put_list(out, c.sensors, [&](const SensorLink& s) { port(s.id, s.subcore, s.tag, s.length); });
  out += ' ';
  put_list(out, c.actuators, [&](const ActuatorLink& a) { port(a.id, a.subcore, a.tag, a.length); });
  out += ' ';
  put_params(out, c.parameters);
  out += ' ';
  put_ids(out, c.subcores);
  out += ' ' + std::to_string(c.generation) + ' ';
  put_list(out, c.history, [&](const HistoryEntry& h) {
    out += '(';
    put_quoted(out, h.mutation_operator);
    out += ' ';
    put_id(out, h.element);
    out += ' ';
    put_quoted(out, h.info);
    out += ')';
  });
  out += ")\n";
}

void write_subcore(std::string& out, const SubCoreGene& sc) {
  out += "(subcore ";
  put_id(out, sc.id);
  out += ' ';
  put_inputs(out, sc.inputs);
  out += ' ';
  put_ids(out, sc.outputs);
  out += ' ';
  put_list(out, sc.connected_to, [&](const LinkSpec& l) {
    out += '(';
    put_id(out, l.to);
    if (l.from) {
      out += ' ';
      put_id(out, *l.from);
    }
    out += ' ';
    out += to_string(l.kind);
    if (l.index) out += ' ' + std::to_string(*l.index);
    out += ')';
  });
  out += ' ';
  put_ids(out, sc.connected_from);
  out += ' ';
  out += to_string(sc.kind);
  out += ' ';
  put_params(out, sc.parameters);
  out += ' ';
  put_ids(out, sc.neurons);
  out += ' ' + std::to_string(sc.generation) + ")\n";
}

void write_neuron(std::string& out, const NeuronGene& n) {
  out += "(neuron ";
  put_id(out, n.id);
  out += ' ';
  put_inputs(out, n.inputs);
  out += ' ';
  put_ids(out, n.outputs);
  out += ' ';
  out += to_string(n.activation);
  out += ' ';
  out += to_string(n.learning);
  out += ' ';
  put_list(out, n.weights, [&](const std::vector<double>& w) {
    put_list(out, w, [&](double x) { put_double(out, x); });
  });
  out += ' ';
  if (n.bias)
    put_double(out, *n.bias);
  else
    out += "nil";
  out += ' ';
  put_params(out, n.parameters);
  out += ' ' + std::to_string(n.generation) + ")\n";
}

// ---- reading ----

struct Sexp {
  enum class Kind { atom, string, list };
  Kind kind = Kind::atom;
  std::string text;
  std::vector<Sexp> items;
};

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : s_(line), line_(lineno) {}

  Sexp parse_record() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '(') fail("record must start with '('");
    Sexp r = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after record");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  Sexp parse_expr() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of record");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Sexp list;
      list.kind = Sexp::Kind::list;
      for (;;) {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of record (missing ')')");
        if (s_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(parse_expr());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') return parse_string();
    Sexp atom;
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '(' && s_[pos_] != ')' &&
           s_[pos_] != '"' && s_[pos_] != '\r')
      ++pos_;
    atom.text = std::string(s_.substr(start, pos_ - start));
    return atom;
  }

  Sexp parse_string() {
    ++pos_;
    Sexp str;
    str.kind = Sexp::Kind::string;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape in string");
        char e = s_[pos_++];
        if (e == 'n')
          str.text += '\n';
        else if (e == '"' || e == '\\')
          str.text += e;
        else
          fail(std::string("unknown escape \\") + e);
      } else {
        str.text += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return str;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

class Decoder {
 public:
  explicit Decoder(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  const Sexp& list(const Sexp& e, const char* what) const {
    if (e.kind != Sexp::Kind::list) fail(std::string("expected a list for ") + what);
    return e;
  }

  const std::string& atom(const Sexp& e, const char* what) const {
    if (e.kind != Sexp::Kind::atom) fail(std::string("expected an atom for ") + what);
    return e.text;
  }

  const std::string& str(const Sexp& e, const char* what) const {
    if (e.kind != Sexp::Kind::string) fail(std::string("expected a quoted string for ") + what);
    return e.text;
  }

  long long integer(const Sexp& e, const char* what) const {
    const auto& t = atom(e, what);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) fail(std::string("bad integer for ") + what + ": '" + t + "'");
    return v;
  }

  int small_int(const Sexp& e, const char* what) const {
    auto v = integer(e, what);
    if (v < INT32_MIN || v > INT32_MAX) fail(std::string("integer out of range for ") + what);
    return static_cast<int>(v);
  }

  NodeId id(const Sexp& e, const char* what) const {
    auto v = integer(e, what);
    if (v < 0) fail(std::string("negative id for ") + what);
    return NodeId{static_cast<std::uint64_t>(v)};
  }

  double real(const Sexp& e, const char* what) const {
    const auto& t = atom(e, what);
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) fail(std::string("bad number for ") + what + ": '" + t + "'");
    return v;
  }

  void arity(const Sexp& rec, std::size_t n, const char* what) const {
    if (rec.items.size() != n)
      fail(std::string(what) + " record expects " + std::to_string(n - 1) + " fields, found " +
           std::to_string(rec.items.size() - 1));
  }

  std::vector<NodeId> ids(const Sexp& e, const char* what) const {
    std::vector<NodeId> out;
    for (const auto& x : list(e, what).items) out.push_back(id(x, what));
    return out;
  }

  std::vector<InputEntry> inputs(const Sexp& e) const {
    std::vector<InputEntry> out;
    for (const auto& x : list(e, "input list").items) {
      const auto& t = list(x, "input entry");
      if (t.items.size() != 2) fail("input entry expects (from length)");
      out.push_back({id(t.items[0], "input source"), small_int(t.items[1], "input length")});
    }
    return out;
  }

  ParameterList params(const Sexp& e) const {
    ParameterList out;
    for (const auto& x : list(e, "parameter list").items) {
      const auto& t = list(x, "parameter");
      if (t.items.size() != 2) fail("parameter expects (\"key\" \"value\")");
      out.emplace_back(str(t.items[0], "parameter key"), str(t.items[1], "parameter value"));
    }
    return out;
  }

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

CoreGene decode_core(const Sexp& r, const Decoder& d) {
  d.arity(r, 8, "core");
  CoreGene c;
  c.id = d.id(r.items[1], "core id");
  for (const auto& x : d.list(r.items[2], "sensor list").items) {
    const auto& t = d.list(x, "sensor");
    if (t.items.size() != 4) d.fail("sensor expects (port subcore \"tag\" length)");
    c.sensors.push_back({d.id(t.items[0], "sensor port"), d.id(t.items[1], "sensor subcore"),
                         d.str(t.items[2], "sensor tag"), d.small_int(t.items[3], "sensor length")});
  }
  for (const auto& x : d.list(r.items[3], "actuator list").items) {
    const auto& t = d.list(x, "actuator");
    if (t.items.size() != 4) d.fail("actuator expects (port subcore \"tag\" length)");
    c.actuators.push_back({d.id(t.items[0], "actuator port"), d.id(t.items[1], "actuator subcore"),
                           d.str(t.items[2], "actuator tag"), d.small_int(t.items[3], "actuator length")});
  }
  c.parameters = d.params(r.items[4]);
  c.subcores = d.ids(r.items[5], "supervised subcore");
  c.generation = d.small_int(r.items[6], "generation");
  for (const auto& x : d.list(r.items[7], "history").items) {
    const auto& t = d.list(x, "history entry");
    if (t.items.size() != 3) d.fail("history entry expects (\"operator\" element \"info\")");
    c.history.push_back({d.str(t.items[0], "history operator"), d.id(t.items[1], "history element"),
                         d.str(t.items[2], "history info")});
  }
  return c;
}

SubCoreGene decode_subcore(const Sexp& r, const Decoder& d) {
  d.arity(r, 10, "subcore");
  SubCoreGene sc;
  sc.id = d.id(r.items[1], "subcore id");
  sc.inputs = d.inputs(r.items[2]);
  sc.outputs = d.ids(r.items[3], "subcore output");
  for (const auto& x : d.list(r.items[4], "link list").items) {
    const auto& t = d.list(x, "link");
    if (t.items.size() < 2) d.fail("link expects at least (to kind)");
    LinkSpec l;
    l.to = d.id(t.items[0], "link target");
    std::size_t kind_at = t.items.size() == 2 ? 1 : 2;
    if (kind_at == 2) l.from = d.id(t.items[1], "link source");
    auto kind = parse_link_kind(d.atom(t.items[kind_at], "link kind"));
    if (!kind) d.fail("unknown link kind '" + t.items[kind_at].text + "'");
    l.kind = *kind;
    std::size_t expect = l.kind == LinkKind::single ? 4 : l.kind == LinkKind::block ? 3 : 2;
    if (t.items.size() != expect) d.fail(std::string(to_string(l.kind)) + " link has the wrong number of fields");
    if (l.kind == LinkKind::single) l.index = d.small_int(t.items[3], "link index");
    sc.connected_to.push_back(l);
  }
  sc.connected_from = d.ids(r.items[5], "output neuron");
  auto kind = parse_subcore_kind(d.atom(r.items[6], "subcore kind"));
  if (!kind) d.fail("unknown subcore kind '" + r.items[6].text + "'");
  sc.kind = *kind;
  sc.parameters = d.params(r.items[7]);
  sc.neurons = d.ids(r.items[8], "supervised neuron");
  sc.generation = d.small_int(r.items[9], "generation");
  return sc;
}

NeuronGene decode_neuron(const Sexp& r, const Decoder& d) {
  d.arity(r, 10, "neuron");
  NeuronGene n;
  n.id = d.id(r.items[1], "neuron id");
  n.inputs = d.inputs(r.items[2]);
  n.outputs = d.ids(r.items[3], "neuron output");
  auto af = parse_activation(d.atom(r.items[4], "activation"));
  if (!af) d.fail("unknown activation '" + r.items[4].text + "'");
  n.activation = *af;
  auto lm = parse_learning(d.atom(r.items[5], "learning method"));
  if (!lm) d.fail("unknown learning method '" + r.items[5].text + "'");
  n.learning = *lm;
  for (const auto& x : d.list(r.items[6], "weight list").items) {
    std::vector<double> w;
    for (const auto& y : d.list(x, "weight vector").items) w.push_back(d.real(y, "weight"));
    n.weights.push_back(std::move(w));
  }
  if (!(r.items[7].kind == Sexp::Kind::atom && r.items[7].text == "nil")) n.bias = d.real(r.items[7], "bias");
  n.parameters = d.params(r.items[8]);
  n.generation = d.small_int(r.items[9], "generation");
  return n;
}

[[noreturn]] void dangling(NodeId id, const std::string& where) {
  throw ReferenceError("unknown id " + std::to_string(id.value) + " referenced by " + where);
}

// Every id a genome mentions must name one of its own elements.
void resolve(const Genome& g) {
  std::set<NodeId> known{g.core.id};
  for (const auto& s : g.core.sensors) known.insert(s.id);
  for (const auto& a : g.core.actuators) known.insert(a.id);
  auto here = [&](const std::string& what, NodeId id) {
    return what + " " + std::to_string(id.value) + " of dxnn " + std::to_string(g.dxnn_id.value);
  };
  for (auto id : g.core.subcores)
    if (!g.find_subcore(id)) dangling(id, here("core", g.core.id));
  for (const auto& sc : g.subcores) known.insert(sc.id);
  for (const auto& n : g.neurons) known.insert(n.id);
  for (const auto& s : g.core.sensors)
    if (!g.find_subcore(s.subcore)) dangling(s.subcore, here("sensor", s.id));
  for (const auto& a : g.core.actuators)
    if (!g.find_subcore(a.subcore)) dangling(a.subcore, here("actuator", a.id));
  for (const auto& sc : g.subcores) {
    auto w = here("subcore", sc.id);
    for (const auto& in : sc.inputs)
      if (!known.count(in.from)) dangling(in.from, w);
    for (auto o : sc.outputs)
      if (!known.count(o)) dangling(o, w);
    for (const auto& l : sc.connected_to) {
      if (!g.find_neuron(l.to)) dangling(l.to, w);
      if (l.from && !known.count(*l.from)) dangling(*l.from, w);
    }
    for (auto n : sc.connected_from)
      if (!g.find_neuron(n)) dangling(n, w);
    for (auto n : sc.neurons)
      if (!g.find_neuron(n)) dangling(n, w);
  }
  for (const auto& n : g.neurons) {
    auto w = here("neuron", n.id);
    for (const auto& in : n.inputs)
      if (!known.count(in.from)) dangling(in.from, w);
    for (auto o : n.outputs)
      if (!known.count(o)) dangling(o, w);
  }
}

}  // namespace

std::string serialize(const Population& pop) {
  std::string out;
  out += kSnapshotHeader;
  out += '\n';
  out += "(population ";
  put_id(out, pop.population_id);
  out += ' ' + std::to_string(pop.generation_counter) + ' ';
  put_list(out, pop.genomes, [&](const Genome& g) { put_id(out, g.dxnn_id); });
  out += ")\n";
  for (const auto& g : pop.genomes) {
    out += "(dxnn ";
    put_id(out, g.dxnn_id);
    out += ' ';
    put_id(out, g.core.id);
    out += " (";
    put_id(out, g.core.id);
    for (const auto& sc : g.subcores) {
      out += ' ';
      put_id(out, sc.id);
    }
    for (const auto& n : g.neurons) {
      out += ' ';
      put_id(out, n.id);
    }
    out += "))\n";
    write_core(out, g.core);
    for (const auto& sc : g.subcores) write_subcore(out, sc);
    for (const auto& n : g.neurons) write_neuron(out, n);
  }
  return out;
}

Population deserialize(std::string_view text) {
  struct Pending {
    Genome genome;
    NodeId core_id;
    std::vector<NodeId> elements;
    std::size_t line = 0;
    bool has_core = false;
  };

  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::size_t start = 0, no = 1;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") != std::string_view::npos) lines.emplace_back(no, line);
      start = end + 1;
      ++no;
    }
  }
  if (lines.empty()) throw ParseError(1, "empty snapshot");
  if (lines.front().second != kSnapshotHeader)
    throw ParseError(lines.front().first, "expected header '" + std::string(kSnapshotHeader) + "'");

  Population pop;
  bool have_population = false;
  std::vector<NodeId> listed;
  std::vector<Pending> genomes;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto [no, line] = lines[i];
    Sexp rec = LineParser(line, no).parse_record();
    Decoder d(no);
    if (rec.items.empty()) d.fail("empty record");
    const auto& head = d.atom(rec.items[0], "record keyword");

    if (head == "population") {
      if (have_population) d.fail("second population record");
      d.arity(rec, 4, "population");
      pop.population_id = d.id(rec.items[1], "population id");
      pop.generation_counter = d.small_int(rec.items[2], "generation counter");
      listed = d.ids(rec.items[3], "dxnn id");
      have_population = true;
      continue;
    }
    if (!have_population) d.fail("population record must come first");

    if (head == "dxnn") {
      d.arity(rec, 4, "dxnn");
      Pending p;
      p.genome.dxnn_id = d.id(rec.items[1], "dxnn id");
      p.core_id = d.id(rec.items[2], "core id");
      p.elements = d.ids(rec.items[3], "element id");
      p.line = no;
      genomes.push_back(std::move(p));
      continue;
    }
    if (genomes.empty()) d.fail("'" + head + "' record before any dxnn record");
    auto& cur = genomes.back();
    if (head == "core") {
      if (cur.has_core) d.fail("second core record for one dxnn");
      cur.genome.core = decode_core(rec, d);
      cur.has_core = true;
    } else if (head == "subcore") {
      cur.genome.subcores.push_back(decode_subcore(rec, d));
    } else if (head == "neuron") {
      cur.genome.neurons.push_back(decode_neuron(rec, d));
    } else {
      d.fail("unknown record keyword '" + head + "'");
    }
  }
  if (!have_population) throw ParseError(lines.back().first, "missing population record");

  std::map<NodeId, Genome> by_id;
  for (auto& p : genomes) {
    auto& g = p.genome;
    auto where = "dxnn " + std::to_string(g.dxnn_id.value);
    if (!p.has_core) dangling(p.core_id, where);
    if (g.core.id != p.core_id) dangling(p.core_id, where);
    auto by = [](const auto& x, const auto& y) { return x.id < y.id; };
    std::stable_sort(g.subcores.begin(), g.subcores.end(), by);
    std::stable_sort(g.neurons.begin(), g.neurons.end(), by);
    std::set<NodeId> present{g.core.id};
    for (const auto& sc : g.subcores) present.insert(sc.id);
    for (const auto& n : g.neurons) present.insert(n.id);
    for (auto e : p.elements)
      if (!present.count(e)) dangling(e, where + " element list");
    if (p.elements.size() != present.size())
      throw ReferenceError(where + " has element records missing from its element list");
    resolve(g);
    auto dxnn_id = g.dxnn_id;
    if (!by_id.emplace(dxnn_id, std::move(g)).second)
      throw ParseError(p.line, "duplicate dxnn id " + std::to_string(dxnn_id.value));
  }
  for (auto id : listed) {
    auto it = by_id.find(id);
    if (it == by_id.end()) dangling(id, "population");
    pop.genomes.push_back(std::move(it->second));
    by_id.erase(it);
  }
  if (!by_id.empty())
    throw ReferenceError("dxnn " + std::to_string(by_id.begin()->first.value) + " is not listed by the population");
  return pop;
}

}  // namespace dxnn
