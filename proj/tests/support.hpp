#pragma once

// Hand-assembled genomes and independent oracles shared by the unit tests
// and the acceptance binary. Nothing here calls into the library's own
// arithmetic for the quantity being checked.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dxnn/genome.hpp"

namespace support {

using dxnn::Activation;
using dxnn::Genome;
using dxnn::InputEntry;
using dxnn::LinkKind;
using dxnn::LinkSpec;
using dxnn::NeuronGene;
using dxnn::NodeId;
using dxnn::SubCoreGene;

// Core 1, subcore 2, sensor port 3, actuator port 4, neuron 5. The neuron
// sees the whole sensor vector through a block link.
inline Genome one_neuron(const std::string& sensor_tag, std::vector<double> w, std::optional<double> bias = {},
                         const std::string& actuator_tag = "out", Activation af = Activation::tanh) {
  const int len = static_cast<int>(w.size());
  Genome g;
  g.dxnn_id = NodeId{1};
  g.core.id = NodeId{1};
  g.core.sensors.push_back({NodeId{3}, NodeId{2}, sensor_tag, len});
  g.core.actuators.push_back({NodeId{4}, NodeId{2}, actuator_tag, 1});
  g.core.subcores = {NodeId{2}};

  SubCoreGene sc;
  sc.id = NodeId{2};
  sc.inputs = {{NodeId{3}, len}};
  sc.outputs = {NodeId{4}};
  sc.connected_to = {{NodeId{5}, NodeId{3}, LinkKind::block, std::nullopt}};
  sc.connected_from = {NodeId{5}};
  sc.neurons = {NodeId{5}};
  g.subcores.push_back(sc);

  NeuronGene n;
  n.id = NodeId{5};
  n.inputs = {{NodeId{2}, len}};
  n.outputs = {NodeId{2}};
  n.activation = af;
  n.weights = {std::move(w)};
  n.bias = bias;
  g.neurons.push_back(n);
  return g;
}

// Two hidden tanh neurons (5: OR-like, 6: AND-like) feeding output neuron 7.
inline Genome xor_network(double k = 3.0) {
  Genome g = one_neuron("xor_input", {k, k}, k, "xor_output");
  auto& sc = g.subcores[0];
  sc.connected_to.push_back({NodeId{6}, NodeId{3}, LinkKind::block, std::nullopt});
  sc.connected_from = {NodeId{7}};
  sc.neurons = {NodeId{5}, NodeId{6}, NodeId{7}};

  NeuronGene& a = g.neurons[0];
  a.outputs = {NodeId{7}};
  NeuronGene b = a;
  b.id = NodeId{6};
  b.bias = -k;
  NeuronGene o;
  o.id = NodeId{7};
  o.inputs = {{NodeId{5}, 1}, {NodeId{6}, 1}};
  o.weights = {{k}, {-k}};
  o.bias = -k;
  o.outputs = {NodeId{2}};
  g.neurons.push_back(b);
  g.neurons.push_back(o);
  return g;
}

// ---- cart-pole oracle ----

// State order: x, x_dot, theta1, theta1_dot, theta2, theta2_dot. Gravity
// is a positive magnitude here with the signs written out explicitly.
using State = std::array<double, 6>;

inline State cartpole_rates(const State& s, double force, bool cart_friction = true) {
  constexpr double G = 9.81, M = 1.0, mu_c = 0.0005, mu_p = 0.000002;
  constexpr double m[2] = {0.1, 0.01}, l[2] = {0.5, 0.05};
  double num = force - (cart_friction ? mu_c * ((s[1] > 0) - (s[1] < 0)) : 0.0);
  double den = M;
  for (int i = 0; i < 2; ++i) {
    const double th = s[2 + 2 * i], w = s[3 + 2 * i];
    const double c = std::cos(th), sn = std::sin(th);
    num += m[i] * l[i] * w * w * sn + 0.75 * m[i] * c * (mu_p * w / (m[i] * l[i]) - G * sn);
    den += m[i] * (1.0 - 0.75 * c * c);
  }
  const double xdd = num / den;
  State d{s[1], xdd, s[3], 0.0, s[5], 0.0};
  for (int i = 0; i < 2; ++i) {
    const double th = s[2 + 2 * i], w = s[3 + 2 * i];
    d[3 + 2 * i] = -0.75 * (xdd * std::cos(th) - G * std::sin(th) + mu_p * w / (m[i] * l[i])) / l[i];
  }
  return d;
}

inline State euler(State s, double force, double duration, double h = 1e-5) {
  const long n = std::lround(duration / h);
  for (long k = 0; k < n; ++k) {
    const State d = cartpole_rates(s, force);
    for (int j = 0; j < 6; ++j) s[j] += h * d[j];
  }
  return s;
}

inline State standard_start() { return {0.0, 0.0, 4.0 * std::numbers::pi / 180.0, 0.0, 0.0, 0.0}; }

using Mat = std::array<std::array<double, 6>, 6>;

// Discrete LQR state feedback u = -K x for the cart-pole linearized at the
// upright equilibrium, force held for `dt`.
inline std::array<double, 6> lqr_gains(double dt, const std::array<double, 6>& q, double r) {
  Mat A{};
  std::array<double, 6> B{};
  const double eps = 1e-6;
  for (int j = 0; j < 6; ++j) {
    State up{}, dn{};
    up[j] = eps;
    dn[j] = -eps;
    auto fu = cartpole_rates(up, 0.0, false), fd = cartpole_rates(dn, 0.0, false);
    for (int i = 0; i < 6; ++i) A[i][j] = (fu[i] - fd[i]) / (2 * eps);
  }
  {
    auto fu = cartpole_rates({}, eps, false), fd = cartpole_rates({}, -eps, false);
    for (int i = 0; i < 6; ++i) B[i] = (fu[i] - fd[i]) / (2 * eps);
  }
  // Ad = exp(A dt), Bd = integral of exp(A s) ds B by series.
  Mat Ad{}, term{};
  std::array<double, 6> Bd{}, bterm = B;
  for (int i = 0; i < 6; ++i) Ad[i][i] = term[i][i] = 1.0;
  for (int i = 0; i < 6; ++i) Bd[i] = dt * B[i];
  for (int k = 1; k < 30; ++k) {
    Mat next{};
    std::array<double, 6> bnext{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        for (int t = 0; t < 6; ++t) next[i][j] += term[i][t] * A[t][j];
        next[i][j] *= dt / k;
      }
    for (int i = 0; i < 6; ++i) {
      for (int t = 0; t < 6; ++t) bnext[i] += A[i][t] * bterm[t];
      bnext[i] *= dt / (k + 1);
    }
    term = next;
    bterm = bnext;
    for (int i = 0; i < 6; ++i) {
      Bd[i] += dt * bterm[i];
      for (int j = 0; j < 6; ++j) Ad[i][j] += term[i][j];
    }
  }
  Mat P{};
  for (int i = 0; i < 6; ++i) P[i][i] = q[i];
  std::array<double, 6> K{};
  for (int it = 0; it < 5000; ++it) {
    std::array<double, 6> PB{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) PB[i] += P[i][j] * Bd[j];
    double s = r;
    for (int i = 0; i < 6; ++i) s += Bd[i] * PB[i];
    // K = (B'PA) / s
    for (int j = 0; j < 6; ++j) {
      double v = 0;
      for (int i = 0; i < 6; ++i) v += PB[i] * Ad[i][j];
      K[j] = v / s;
    }
    // P = Q + A'P(A - B K)
    Mat PA{}, closed{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) closed[i][j] = Ad[i][j] - Bd[i] * K[j];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        for (int t = 0; t < 6; ++t) PA[i][j] += P[i][t] * closed[t][j];
    Mat Pn{};
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        for (int t = 0; t < 6; ++t) Pn[i][j] += Ad[t][i] * PA[t][j];
        if (i == j) Pn[i][j] += q[i];
      }
    // Keep P symmetric; rounding would otherwise grow an antisymmetric part.
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) P[i][j] = 0.5 * (Pn[i][j] + Pn[j][i]);
  }
  return K;
}

// ---- selection oracle ----

struct OracleAllotment {
  std::size_t index;
  long nao;
};

// Literal walk through the competition steps with plain loops.
inline std::vector<OracleAllotment> competition_oracle(const std::vector<double>& fitness,
                                                       const std::vector<std::size_t>& size, long limit) {
  const std::size_t n = fitness.size();
  double tot_energy = 0, tot_neurons = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tot_energy += fitness[i];
    tot_neurons += static_cast<double>(size[i]);
  }
  const double aec = tot_energy / tot_neurons;

  // Insertion sort, stable: higher fitness first, then fewer neurons.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pos = order.size();
    while (pos > 0) {
      const std::size_t prev = order[pos - 1];
      const bool before = fitness[i] > fitness[prev] || (fitness[i] == fitness[prev] && size[i] < size[prev]);
      if (!before) break;
      --pos;
    }
    order.insert(order.begin() + static_cast<long>(pos), i);
  }
  order.resize(n - n / 2);

  std::vector<long> ao;
  long ao_sum = 0;
  for (auto i : order) {
    const double raw = (fitness[i] / aec) / static_cast<double>(size[i]);
    const long a = static_cast<long>(std::floor(raw + 0.5));
    ao.push_back(a);
    ao_sum += a;
  }
  std::vector<OracleAllotment> out;
  if (ao_sum == 0) {
    for (std::size_t k = 0; k < order.size(); ++k) out.push_back({order[k], k == 0 ? 1 : 0});
    return out;
  }
  const double normalizer = static_cast<double>(ao_sum) / static_cast<double>(limit);
  for (std::size_t k = 0; k < order.size(); ++k)
    out.push_back({order[k], static_cast<long>(std::floor(static_cast<double>(ao[k]) / normalizer + 0.5))});
  return out;
}

// Chi-square statistic of observed counts against a uniform expectation.
inline double chi_square_uniform(const std::vector<long>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expect = total / static_cast<double>(counts.size());
  double chi = 0;
  for (long c : counts) chi += (c - expect) * (c - expect) / expect;
  return chi;
}

}  // namespace support
