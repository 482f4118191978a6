// dxnn run | inspect | replay

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dxnn/errors.hpp"
#include "dxnn/harness.hpp"
#include "dxnn/phenotype.hpp"
#include "dxnn/serialize.hpp"

using namespace dxnn;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_genome(const Genome& g, std::ostream& os) {
  os << "dxnn " << g.dxnn_id.value << "  generation " << g.core.generation << "  subcores " << g.subcores.size()
     << "  neurons " << g.neurons.size() << "  weights " << g.weight_count() << '\n';
  for (const auto& s : g.core.sensors)
    os << "  sensor   [" << s.id.value << "] '" << s.tag << "' len " << s.length << " -> subcore " << s.subcore.value
       << '\n';
  for (const auto& a : g.core.actuators)
    os << "  actuator [" << a.id.value << "] '" << a.tag << "' len " << a.length << " <- subcore " << a.subcore.value
       << '\n';
  for (const auto& sc : g.subcores) {
    os << "  subcore [" << sc.id.value << "] gen " << sc.generation << " inputs";
    for (const auto& in : sc.inputs) os << ' ' << in.from.value << ':' << in.length;
    os << " outputs";
    for (auto o : sc.outputs) os << ' ' << o.value;
    os << '\n';
    for (auto nid : sc.neurons) {
      const auto* n = g.find_neuron(nid);
      os << "    neuron [" << nid.value << "] " << to_string(n->activation) << '/' << to_string(n->learning) << " gen "
         << n->generation << " inputs";
      for (const auto& in : n->inputs) os << ' ' << in.from.value << ':' << in.length;
      os << (n->bias ? " +bias" : "") << '\n';
    }
  }
  if (!g.core.history.empty()) {
    os << "  history:";
    for (const auto& h : g.core.history) os << ' ' << h.mutation_operator;
    os << '\n';
  }
  auto report = validate(g);
  if (report.empty())
    os << "  valid\n";
  else
    os << "  INVALID\n" << describe(report);
}

int cmd_replay(const std::string& path, const std::string& env_name, const std::string& trace_path) {
  Population pop = restore(path);
  for (const auto& g : pop.genomes) {
    std::optional<EnvKind> kind = env_name.empty() ? genome_environment(g) : parse_env_kind(env_name);
    if (!kind) throw ConfigError("cannot tell the environment of genome " + std::to_string(g.dxnn_id.value) +
                                 "; pass --env");
    auto env = make_environment(*kind);
    Phenotype p = compile(g);
    EvalResult r;
    const auto* dpb = dynamic_cast<const DpbEnvironment*>(env.get());
    if (dpb && !trace_path.empty()) {
      std::ofstream trace(trace_path);
      if (!trace) throw std::runtime_error("cannot open trace '" + trace_path + "'");
      r = dpb_evaluate(p, dpb->config(), &trace);
    } else {
      r = env->evaluate(p);
    }
    std::cout << "dxnn " << g.dxnn_id.value << " env " << env->name() << " fitness " << r.fitness << " solved "
              << (r.solved ? "yes" : "no") << " steps " << r.control_steps << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular neuroevolution runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "evolve solutions and write a report");
  std::string env_name = "xor", config_path, out_dir = "dxnn_out";
  long pop_limit = 10, max_evals = 50000;
  int base_attempts = 10, runs = 1, workers = 1;
  std::uint64_t seed = 1;
  double k_ratio = 5.0;
  bool trace = false;
  run->add_option("--config", config_path, "key=value file; flags override it");
  auto* env_opt = run->add_option("--env", env_name, "xor | dpb_v | dpb_nv_undamped | dpb_nv_damped");
  auto* pop_opt = run->add_option("--pop-limit", pop_limit, "population limit");
  auto* att_opt = run->add_option("--base-max-attempts", base_attempts, "base max attempts");
  auto* evals_opt = run->add_option("--max-evals", max_evals, "evaluation budget per run");
  auto* runs_opt = run->add_option("--runs", runs, "independent runs");
  auto* seed_opt = run->add_option("--seed", seed, "master seed");
  auto* k_opt = run->add_option("--k-ratio", k_ratio, "neurons per subcore needed for subcore operators");
  auto* workers_opt = run->add_option("--workers", workers, "worker threads");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace-episodes", trace, "write a per-step trace of each champion (cart-pole tasks)");

  auto* inspect = app.add_subcommand("inspect", "pretty-print a snapshot");
  std::string snap_path;
  inspect->add_option("snapshot", snap_path)->required();

  auto* replay = app.add_subcommand("replay", "re-evaluate snapshot genomes");
  std::string replay_path, replay_env, trace_path;
  replay->add_option("snapshot", replay_path)->required();
  replay->add_option("--env", replay_env, "environment (default: the one recorded in the genome)");
  replay->add_option("--trace", trace_path, "per-step CSV for cart-pole tasks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = parse_config(read_file(config_path), cfg);
      if (*env_opt) {
        auto kind = parse_env_kind(env_name);
        if (!kind) throw ConfigError("unknown environment '" + env_name + "'");
        auto base = default_config(*kind);
        cfg.environment = *kind;
        if (!*att_opt && config_path.empty()) cfg.base_max_attempts = base.base_max_attempts;
      }
      if (*pop_opt) cfg.population_limit = pop_limit;
      if (*att_opt) cfg.base_max_attempts = base_attempts;
      if (*evals_opt) cfg.max_evaluations = max_evals;
      if (*runs_opt) cfg.runs = runs;
      if (*seed_opt) cfg.master_seed = seed;
      if (*k_opt) cfg.k_ratio = k_ratio;
      if (*workers_opt) cfg.workers = workers;
      check_config(cfg);

      auto t0 = std::chrono::steady_clock::now();
      auto report = run_experiment(cfg);
      auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_report(report, out_dir);
      if (trace && cfg.environment != EnvKind::xor_gate) {
        auto env = make_environment(cfg.environment);
        const auto& dcfg = static_cast<const DpbEnvironment&>(*env).config();
        for (const auto& r : report.runs) {
          std::ofstream os(std::filesystem::path(out_dir) / ("trace_run_" + std::to_string(r.run) + ".csv"));
          Phenotype p = compile(r.champion);
          dpb_evaluate(p, dcfg, &os);
        }
      }
      std::cout << report_summary(report) << "wall_seconds: " << secs << '\n';
    } else if (*inspect) {
      Population pop = restore(snap_path);
      std::cout << "population " << pop.population_id.value << "  generation " << pop.generation_counter << "  genomes "
                << pop.genomes.size() << '\n';
      for (const auto& g : pop.genomes) print_genome(g, std::cout);
    } else if (*replay) {
      return cmd_replay(replay_path, replay_env, trace_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
