#include <doctest.h>

#include <cmath>

#include "dxnn/errors.hpp"
#include "dxnn/phenotype.hpp"
#include "fuzz.hpp"
#include "support.hpp"

using namespace dxnn;
using doctest::Approx;

namespace {

std::vector<double> run_route(std::vector<std::pair<NodeId, std::vector<double>>> in, LinkSpec spec) {
  std::vector<RouteSource<double>> src;
  for (auto& [id, v] : in) src.push_back({id, v});
  return route<double>(src, spec);
}

// Neuron 5 also reads its own previous output with weight `w_self`.
Genome self_loop(double w_in, double w_self) {
  Genome g = support::one_neuron("in", {w_in});
  auto& n = g.neurons[0];
  n.inputs.push_back({NodeId{5}, 1});
  n.weights.push_back({w_self});
  n.outputs.push_back(NodeId{5});
  return g;
}

}  // namespace

TEST_SUITE("phenotype") {
  TEST_CASE("single link picks the 1-based element") {
    auto v = run_route({{NodeId{1}, {10, 20, 30}}}, {NodeId{9}, NodeId{1}, LinkKind::single, 3});
    CHECK(v == std::vector<double>{30});
  }

  TEST_CASE("block link forwards one source") {
    auto v = run_route({{NodeId{1}, {1, 2, 3}}, {NodeId{2}, {7, 8}}}, {NodeId{9}, NodeId{2}, LinkKind::block, {}});
    CHECK(v == std::vector<double>{7, 8});
  }

  TEST_CASE("all link concatenates in input order") {
    auto v = run_route({{NodeId{1}, {1, 2, 3}}, {NodeId{2}, {7, 8}}}, {NodeId{9}, {}, LinkKind::all, {}});
    CHECK(v == std::vector<double>{1, 2, 3, 7, 8});
  }

  TEST_CASE("route errors on a missing source or index") {
    CHECK_THROWS_AS(run_route({{NodeId{1}, {1}}}, {NodeId{9}, NodeId{4}, LinkKind::block, {}}), RoutingError);
    CHECK_THROWS_AS(run_route({{NodeId{1}, {1}}}, {NodeId{9}, NodeId{1}, LinkKind::single, 2}), RoutingError);
  }

  TEST_CASE("neuron step") {
    NeuronState zero{Activation::tanh, Learning::none, {0.0}};
    std::vector<double> in{0.8};
    CHECK(neuron_step(zero, in) == 0.0);
    CHECK(zero.weights == std::vector<double>{0.0});

    NeuronState one{Activation::tanh, Learning::none, {1.0}};
    std::vector<double> half{0.5};
    CHECK(neuron_step(one, half) == Approx(0.4621).epsilon(1e-4));
    CHECK(one.weights == std::vector<double>{1.0});

    NeuronState heb{Activation::tanh, Learning::hebbian, {1.0}};
    std::vector<double> unit{1.0};
    const double out = neuron_step(heb, unit);
    CHECK(out == Approx(0.7616).epsilon(1e-4));
    CHECK(heb.weights[0] == Approx(1.0 + 0.1 * std::tanh(1.0) * 1.0));
    CHECK(heb.weights[0] == Approx(1.0762).epsilon(1e-4));
  }

  TEST_CASE("bias uses an implicit input of one") {
    NeuronState s{Activation::tanh, Learning::none, {2.0, -0.5}, true};
    std::vector<double> in{0.25};
    CHECK(neuron_step(s, in) == Approx(std::tanh(2.0 * 0.25 - 0.5)));
  }

  TEST_CASE("hebbian weights stay inside the limit") {
    NeuronState s{Activation::tanh, Learning::hebbian, {3.1, 3.1}};
    std::vector<double> in{1.0, 1.0};
    for (int i = 0; i < 50; ++i) neuron_step(s, in);
    for (double w : s.weights) CHECK(std::abs(w) <= std::numbers::pi);
  }

  TEST_CASE("activations") {
    for (double x = -20; x <= 20; x += 0.37) {
      const double t = activate(Activation::tanh, x);
      // Strict while the result is representable below 1.
      if (std::abs(x) < 15) CHECK(std::abs(t) < 1.0);
      CHECK(std::abs(t) <= 1.0);
      CHECK(activate(Activation::sigmoid, x) >= 0.0);
      CHECK(activate(Activation::gaussian, x) <= 1.0);
      CHECK(std::abs(activate(Activation::sine, x)) <= 1.0);
    }
    CHECK(activate(Activation::tanh, 0.0) == 0.0);
    CHECK(activate(Activation::sigmoid, 0.0) == 0.5);
    CHECK(activate(Activation::gaussian, 0.0) == 1.0);
  }

  TEST_CASE("xor seed compiles to one neuron and zero weights give zero") {
    Rng rng(11);
    std::vector<SensorSpec> s{{"xor_input", 2}};
    std::vector<ActuatorSpec> a{{"xor_output", 1}};
    Genome g = new_minimal_genome(s, a, rng);
    for (auto& w : g.neurons[0].weights) std::fill(w.begin(), w.end(), 0.0);
    Phenotype p = compile(g);
    CHECK(p.schedule().size() == 1);
    auto out = p.cycle({{"xor_input", {1.0, -1.0}}});
    REQUIRE(out.size() == 1);
    CHECK(out[0].first == "xor_output");
    CHECK(out[0].second == std::vector<double>{0.0});
  }

  TEST_CASE("all link over two sensors of lengths 3 and 2") {
    Genome g = support::one_neuron("a", {1, 1, 1});
    g.core.sensors.push_back({NodeId{6}, NodeId{2}, "b", 2});
    auto& sc = g.subcores[0];
    sc.inputs.push_back({NodeId{6}, 2});
    sc.connected_to[0] = {NodeId{5}, std::nullopt, LinkKind::all, std::nullopt};
    g.neurons[0].inputs[0].length = 5;
    g.neurons[0].weights[0] = {0.1, 0.2, 0.3, 0.4, 0.5};
    REQUIRE(validate(g).empty());
    Phenotype p = compile(g);
    REQUIRE(p.schedule().size() == 1);
    CHECK(p.schedule()[0].state.input_length() == 5);
    auto out = p.cycle({{"a", {1, 2, 3}}, {"b", {4, 5}}});
    CHECK(out[0].second[0] == Approx(std::tanh(0.1 + 0.4 + 0.9 + 1.6 + 2.5)));
  }

  TEST_CASE("self loop reads zero on the first cycle") {
    Genome g = self_loop(0.7, 1.3);
    REQUIRE(validate(g).empty());
    Phenotype p = compile(g);
    CHECK(p.recurrent_edge_count() == 1);
    const double o1 = p.cycle({{"in", {1.0}}})[0].second[0];
    CHECK(o1 == Approx(std::tanh(0.7)));
    const double o2 = p.cycle({{"in", {1.0}}})[0].second[0];
    CHECK(o2 == Approx(std::tanh(0.7 + 1.3 * o1)));
    CHECK(o1 != o2);
    p.reset();
    CHECK(p.cycle({{"in", {1.0}}})[0].second[0] == o1);
  }

  TEST_CASE("two-neuron cycle under constant input") {
    // 5 -> 6 forward, 6 -> 5 back; output from 6.
    Genome g = support::one_neuron("in", {0.5});
    auto& sc = g.subcores[0];
    sc.neurons.push_back(NodeId{6});
    sc.connected_from = {NodeId{6}};
    NeuronGene b;
    b.id = NodeId{6};
    b.inputs = {{NodeId{5}, 1}};
    b.weights = {{2.0}};
    b.outputs = {NodeId{2}, NodeId{5}};
    g.neurons[0].outputs = {NodeId{6}};
    g.neurons[0].inputs.push_back({NodeId{6}, 1});
    g.neurons[0].weights.push_back({-1.5});
    g.neurons.push_back(b);
    REQUIRE(validate(g).empty());
    Phenotype p = compile(g);
    const double a1 = std::tanh(0.5), b1 = std::tanh(2.0 * a1);
    const double a2 = std::tanh(0.5 - 1.5 * b1), b2 = std::tanh(2.0 * a2);
    CHECK(p.cycle({{"in", {1.0}}})[0].second[0] == Approx(b1));
    CHECK(p.cycle({{"in", {1.0}}})[0].second[0] == Approx(b2));
  }

  TEST_CASE("hand-built xor network") {
    Phenotype p = compile(support::xor_network());
    CHECK(p.schedule().size() == 3);
    CHECK(p.recurrent_edge_count() == 0);
    for (auto [a, b] : {std::pair{-1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}, {1.0, 1.0}}) {
      const double want = (a == b) ? -1.0 : 1.0;
      CHECK(std::abs(p.cycle({{"xor_input", {a, b}}})[0].second[0] - want) < 0.1);
    }
  }

  TEST_CASE("missing or mis-sized sensor is an input error") {
    Phenotype p = compile(support::one_neuron("in", {1.0, 1.0}));
    CHECK_THROWS_AS(p.cycle({}), InputError);
    CHECK_THROWS_AS(p.cycle({{"in", {1.0}}}), InputError);
    CHECK_THROWS_AS(p.cycle({{"other", {1.0, 1.0}}}), InputError);
  }

  TEST_CASE("invalid genome does not compile") {
    Genome g = support::one_neuron("in", {1.0});
    g.neurons[0].weights[0].clear();
    CHECK_THROWS_AS(compile(g), CompileError);
  }

  TEST_CASE("fuzzed genomes emit the declared actuator lengths") {
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
      auto ctx = support::fuzz_context(rng);
      Genome g = support::fuzz_genome(rng, ctx, 20);
      Phenotype p = compile(g);
      Phenotype::NamedVectors in;
      std::vector<double> flat;
      for (const auto& s : p.sensors()) {
        std::vector<double> v(static_cast<std::size_t>(s.length));
        for (auto& x : v) x = uniform_real(rng, -1, 1);
        flat.insert(flat.end(), v.begin(), v.end());
        in.emplace_back(s.tag, v);
      }
      Phenotype q = compile(g);
      for (int c = 0; c < 3; ++c) {
        auto out = p.cycle(in);
        REQUIRE(out.size() == g.core.actuators.size());
        std::vector<double> flat_out(q.actuator_width());
        q.cycle_into(flat, flat_out);
        std::size_t k = 0;
        for (std::size_t j = 0; j < out.size(); ++j) {
          CHECK(out[j].second.size() == static_cast<std::size_t>(g.core.actuators[j].length));
          for (double v : out[j].second) CHECK(v == flat_out[k++]);
        }
      }
    }
  }
}
