// Acceptance run: one PASS/FAIL line per criterion, with the numbers
// behind it. Exit status is non-zero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "dxnn/environments.hpp"
#include "dxnn/errors.hpp"
#include "dxnn/harness.hpp"
#include "dxnn/mutation.hpp"
#include "dxnn/phenotype.hpp"
#include "dxnn/selection.hpp"
#include "dxnn/serialize.hpp"
#include "dxnn/tuning.hpp"
#include "fuzz.hpp"
#include "support.hpp"

using namespace dxnn;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

struct Batch {
  std::vector<RunRecord> runs;
  std::vector<double> run_seconds;
  double total_seconds = 0.0;

  double solve_rate() const {
    double s = 0;
    for (const auto& r : runs) s += r.solved ? 1 : 0;
    return s / static_cast<double>(runs.size());
  }
  // Unsolved runs count with the evaluations they spent.
  double median_evaluations() const {
    std::vector<double> e;
    for (const auto& r : runs) e.push_back(static_cast<double>(r.evaluations));
    return median(e);
  }
  std::vector<double> sizes() const {
    std::vector<double> s;
    for (const auto& r : runs) s.push_back(static_cast<double>(r.champion_size));
    return s;
  }
  std::size_t max_size() const {
    std::size_t m = 0;
    for (const auto& r : runs) m = std::max(m, r.champion_size);
    return m;
  }
  std::string histogram() const {
    std::map<std::size_t, int> h;
    for (const auto& r : runs) ++h[r.champion_size];
    std::string out = "{";
    for (auto [k, v] : h) out += (out.size() > 1 ? " " : "") + std::to_string(k) + ":" + std::to_string(v);
    return out + "}";
  }
};

Batch run_batch(const ExperimentConfig& cfg, int n) {
  Batch b;
  const auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    const auto t = Clock::now();
    b.runs.push_back(run_once(cfg, run_seed(cfg.master_seed, i)));
    b.run_seconds.push_back(seconds_since(t));
  }
  b.total_seconds = seconds_since(t0);
  return b;
}

std::string summary(const Batch& b) {
  return "solved " + fmt("%.1f%%", 100 * b.solve_rate()) + ", median evals " + fmt("%.0f", b.median_evaluations()) +
         ", champion sizes " + b.histogram() + " (median " + fmt("%.1f", median(b.sizes())) + ", max " +
         std::to_string(b.max_size()) + "), total " + fmt("%.1fs", b.total_seconds);
}

void xor_criterion() {
  ExperimentConfig cfg = default_config(EnvKind::xor_gate);
  const Batch b = run_batch(cfg, 30);
  const double slowest = *std::max_element(b.run_seconds.begin(), b.run_seconds.end());
  const bool ok = b.solve_rate() >= 0.95 && b.max_size() <= 5 && slowest < 10.0;
  report(ok, "xor (30 runs: solve >= 95%, every champion <= 5 neurons, each run < 10s)",
         summary(b) + ", slowest run " + fmt("%.2fs", slowest));
}

void dpb_v_criterion() {
  ExperimentConfig cfg = default_config(EnvKind::dpb_v);
  const Batch b = run_batch(cfg, 30);
  const bool ok =
      b.solve_rate() >= 0.90 && b.median_evaluations() <= 5000 && b.max_size() <= 4 && b.total_seconds <= 600;
  report(ok, "dpb_v (30 runs: solve >= 90%, median evals <= 5000, champion <= 4 neurons, <= 10 min)", summary(b));
}

Batch dpb_nv_criterion() {
  const auto t0 = Clock::now();
  const Batch u = run_batch(default_config(EnvKind::dpb_nv_undamped), 30);
  const Batch d = run_batch(default_config(EnvKind::dpb_nv_damped), 30);
  const double total = seconds_since(t0);
  auto good = [](const Batch& b) {
    return b.solve_rate() >= 0.80 && b.median_evaluations() <= 20000 && b.max_size() <= 5;
  };
  const bool ok = good(u) && good(d) && total <= 1800;
  report(ok, "dpb_nv (30 runs each: solve >= 80%, median evals <= 20000, champion <= 5 neurons, <= 30 min)",
         "undamped [" + summary(u) + "]; damped [" + summary(d) + "]; combined " + fmt("%.1fs", total));
  return d;
}

void compactness_criterion(const Batch& damped_base20) {
  // The first 20 damped runs above used base 20 and the same run seeds.
  std::vector<double> at20 = damped_base20.sizes();
  at20.resize(20);
  ExperimentConfig cfg = default_config(EnvKind::dpb_nv_damped);
  cfg.base_max_attempts = 100;
  const Batch b100 = run_batch(cfg, 20);
  const double m20 = median(at20), m100 = median(b100.sizes());
  report(m100 <= m20, "compactness (dpb_nv damped, 20 runs each: median size at base 100 <= at base 20)",
         "median " + fmt("%.1f", m100) + " at 100 " + b100.histogram() + " vs " + fmt("%.1f", m20) +
             " at 20, solved " + fmt("%.0f%%", 100 * b100.solve_rate()) + " at 100");
}

support::State to_array(const CartPoleState& s) {
  return {s.x, s.x_dot, s.theta[0], s.theta_dot[0], s.theta[1], s.theta_dot[1]};
}

double max_gap(const support::State& a, const support::State& b) {
  double m = 0;
  for (int i = 0; i < 6; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Closed-loop comparison: both integrators run the same linear feedback
// law on their own state for 100 control steps.
double physics_gap(double euler_step) {
  auto k = support::lqr_gains(0.02, {1, 1, 100, 1, 100, 1}, 1.0);
  auto law = [&](const support::State& x) {
    double u = 0;
    for (int j = 0; j < 6; ++j) u -= k[j] * x[j];
    double f = 10.0 * std::tanh(u / 10.0);
    if (std::abs(f) < 10.0 / 256.0) f = f < 0 ? -10.0 / 256.0 : 10.0 / 256.0;
    return f;
  };
  CartPoleState s = initial_cartpole_state();
  support::State ref = support::standard_start();
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const double f = law(to_array(s)), g = law(ref);
    s = rk4_step(rk4_step(s, f, 0.01), f, 0.01);
    ref = support::euler(ref, g, 0.02, euler_step);
    worst = std::max(worst, max_gap(to_array(s), ref));
  }
  return worst;
}

void physics_criterion() {
  const double gap = physics_gap(1e-5);
  const double fine = physics_gap(1e-6);

  auto k = support::lqr_gains(0.02, {1, 1, 100, 1, 100, 1}, 1.0);
  const double scale[6] = {2.4, 10, 0.6283, 5, 0.6283, 5};
  std::vector<double> w;
  for (int j = 0; j < 6; ++j) w.push_back(-k[j] * scale[j] / 10.0);
  Phenotype p = compile(support::one_neuron("cart_pole_state", w, {}, "cart_force"));
  const EvalResult r = make_environment(EnvKind::dpb_v)->evaluate(p);

  report(gap <= 1e-4 && r.solved,
         "physics (rk4 vs 1e-5 euler within 1e-4 over 100 steps; hand-built controller solves dpb_v)",
         "max gap " + fmt("%.4g", gap) + " (vs 1e-6 euler: " + fmt("%.4g", fine) + "), linear controller " +
             (r.solved ? "solved" : "failed") + " in " + std::to_string(r.control_steps) + " steps");
}

void selection_criterion() {
  Rng rng(41);
  int mismatches = 0;
  for (int t = 0; t < 10000; ++t) {
    const int n = uniform_int(rng, 1, 30);
    const long limit = uniform_int(rng, 1, 30);
    const bool coarse = uniform_int(rng, 0, 1) == 1;
    std::vector<double> f(static_cast<std::size_t>(n));
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      f[static_cast<std::size_t>(i)] = coarse ? uniform_int(rng, 0, 5) : uniform_real(rng, 0.0, 100.0);
      sizes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(uniform_int(rng, 1, coarse ? 4 : 40));
    }
    if (std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; })) f[0] = 1.0;
    std::vector<ScoredGenome> scored;
    for (int i = 0; i < n; ++i) {
      ScoredGenome s;
      s.genome.dxnn_id = NodeId{static_cast<std::uint64_t>(i + 1)};
      s.fitness = f[static_cast<std::size_t>(i)];
      s.tot_neurons = sizes[static_cast<std::size_t>(i)];
      scored.push_back(s);
    }
    const auto got = competition_select(scored, limit);
    const auto want = support::competition_oracle(f, sizes, limit);
    bool same = got.size() == want.size();
    for (std::size_t k = 0; same && k < got.size(); ++k)
      same = got[k].index == want[k].index && got[k].nao == want[k].nao;
    mismatches += same ? 0 : 1;
  }
  report(mismatches == 0, "selection oracle (10000 random cases, exact agreement)",
         std::to_string(mismatches) + " mismatches");
}

void property_criterion() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;

  {
    Rng rng(101);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      auto ctx = support::fuzz_context(rng);
      Population p;
      p.population_id = NodeId{1};
      p.genomes.push_back(support::fuzz_genome(rng, ctx, 30));
      const auto text = serialize(p);
      const auto back = deserialize(text);
      bad += (back == p && serialize(back) == text) ? 0 : 1;
    }
    ok = ok && bad == 0;
    detail += "serialize " + std::to_string(1000 - bad) + "/1000";
  }
  {
    Rng rng(102);
    int applied = 0, invalid = 0;
    while (applied < 1000) {
      auto ctx = support::fuzz_context(rng);
      Genome g = support::fuzz_genome(rng, ctx, 15);
      ++g.core.generation;
      const auto ops = available_operators(g, ctx);
      const auto op = ops[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(ops.size()) - 1))];
      auto out = apply_operator(g, op, ctx, rng);
      if (!out) continue;
      ++applied;
      invalid += validate(*out).empty() ? 0 : 1;
    }
    ok = ok && invalid == 0;
    detail += ", mutation closure " + std::to_string(applied - invalid) + "/" + std::to_string(applied);
  }
  {
    Rng rng(103);
    TuningConfig cfg;
    int violations = 0, changes = 0;
    for (int i = 0; i < 1000; ++i) {
      auto ctx = support::fuzz_context(rng);
      Genome g = support::fuzz_genome(rng, ctx, 30);
      const Genome before = g;
      const auto ngn = build_ngn(g);
      const std::set<NodeId> allowed(ngn.begin(), ngn.end());
      const auto d = perturb(g, ngn, cfg, rng);
      for (const auto& c : d.changes) {
        ++changes;
        if (!allowed.count(c.neuron) || !(std::abs(c.after - c.before) < std::numbers::pi / 2)) ++violations;
      }
      for (std::size_t k = 0; k < g.neurons.size(); ++k)
        if (!allowed.count(g.neurons[k].id) && !(g.neurons[k] == before.neurons[k])) ++violations;
    }
    ok = ok && violations == 0;
    detail += ", perturbation bounds " + std::to_string(violations) + " violations in " + std::to_string(changes) +
              " changes";
  }
  {
    Rng rng(104);
    TuningConfig cfg;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      auto ctx = support::fuzz_context(rng);
      Genome g = support::fuzz_genome(rng, ctx, 30);
      const Genome before = g;
      const auto ngn = build_ngn(g);
      std::vector<PerturbationDelta> stack;
      for (int k = 0; k < 3; ++k) stack.push_back(perturb(g, ngn, cfg, rng));
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) revert(g, *it);
      bad += g == before ? 0 : 1;
    }
    ok = ok && bad == 0;
    detail += ", revert " + std::to_string(1000 - bad) + "/1000";
  }
  {
    ExperimentConfig cfg = default_config(EnvKind::xor_gate);
    cfg.runs = 2;
    cfg.master_seed = 7;
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    const bool same = report_csv(a) == report_csv(b) && report_summary(a) == report_summary(b);
    ok = ok && same;
    detail += std::string(", determinism ") + (same ? "byte-identical" : "reports differ");
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 60.0;
  report(ok, "property suites (< 1 min)", detail + ", " + fmt("%.1fs", elapsed));
}

}  // namespace

int main() {
  try {
    selection_criterion();
    property_criterion();
    physics_criterion();
    xor_criterion();
    dpb_v_criterion();
    const Batch damped = dpb_nv_criterion();
    compactness_criterion(damped);
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
