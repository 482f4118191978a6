#include "dxnn/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dxnn/errors.hpp"
#include "dxnn/mutation.hpp"
#include "dxnn/selection.hpp"
#include "dxnn/serialize.hpp"
#include "dxnn/tuning.hpp"

namespace dxnn {

ExperimentConfig default_config(EnvKind env) {
  ExperimentConfig cfg;
  cfg.environment = env;
  cfg.base_max_attempts = env == EnvKind::dpb_v ? 10 : 20;
  return cfg;
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.population_limit < 1) throw ConfigError("population limit must be at least 1");
  if (cfg.runs < 1) throw ConfigError("runs must be at least 1");
  if (cfg.base_max_attempts < 1) throw ConfigError("base max attempts must be positive");
  if (cfg.base_max_attempts > 100) throw ConfigError("base max attempts exceeds the cap of 100");
  if (cfg.max_evaluations < 0) throw ConfigError("max evaluations must be non-negative");
  if (!(cfg.k_ratio > 0)) throw ConfigError("k ratio must be positive");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.catalog.activations.empty()) throw ConfigError("empty activation catalog");
  if (cfg.catalog.learnings.empty()) throw ConfigError("empty learning catalog");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view v, std::size_t line, std::string_view key) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line) + ": bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view v, std::size_t line, Parse parse) {
  std::vector<T> out;
  while (!v.empty()) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    auto x = parse(item);
    if (!x) throw ConfigError("line " + std::to_string(line) + ": unknown catalog entry '" + std::string(item) + "'");
    out.push_back(*x);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string num(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg) {
  std::size_t line_no = 0;
  bool env_set = false, attempts_set = false;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "env") {
      auto e = parse_env_kind(value);
      if (!e) throw ConfigError("line " + std::to_string(line_no) + ": unknown environment '" + std::string(value) + "'");
      cfg.environment = *e;
      env_set = true;
    } else if (key == "pop_limit") {
      cfg.population_limit = parse_number<long>(value, line_no, key);
    } else if (key == "base_max_attempts") {
      cfg.base_max_attempts = parse_number<int>(value, line_no, key);
      attempts_set = true;
    } else if (key == "max_evals") {
      cfg.max_evaluations = parse_number<long>(value, line_no, key);
    } else if (key == "runs") {
      cfg.runs = parse_number<int>(value, line_no, key);
    } else if (key == "seed") {
      cfg.master_seed = parse_number<std::uint64_t>(value, line_no, key);
    } else if (key == "k_ratio") {
      cfg.k_ratio = parse_number<double>(value, line_no, key);
    } else if (key == "workers") {
      cfg.workers = parse_number<int>(value, line_no, key);
    } else if (key == "af_catalog") {
      cfg.catalog.activations = parse_list<Activation>(value, line_no, parse_activation);
    } else if (key == "lm_catalog") {
      cfg.catalog.learnings = parse_list<Learning>(value, line_no, parse_learning);
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (env_set && !attempts_set) cfg.base_max_attempts = default_config(cfg.environment).base_max_attempts;
  return cfg;
}

std::uint64_t run_seed(std::uint64_t master_seed, int run_index) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(run_index)});
}

std::optional<EnvKind> genome_environment(const Genome& g) {
  for (const auto& [k, v] : g.core.parameters)
    if (k == "environment") return parse_env_kind(v);
  return std::nullopt;
}

Population seed_population(const ExperimentConfig& cfg, Rng& rng) {
  auto env = make_environment(cfg.environment);
  const auto sensors = env->sensors();
  const auto actuators = env->actuators();
  Population pop;
  pop.population_id = NodeId{1};
  for (long i = 0; i < cfg.population_limit; ++i) {
    Genome g = new_minimal_genome(sensors, actuators, rng, cfg.catalog);
    g.dxnn_id = NodeId{static_cast<std::uint64_t>(i + 1)};
    g.core.parameters.emplace_back("environment", env->name());
    pop.genomes.push_back(std::move(g));
  }
  return pop;
}

namespace {

// Stream keys for the randomness of one generation.
constexpr std::uint64_t kTuneStream = 0x74756e65;
constexpr std::uint64_t kMutateStream = 0x6d757461;

bool better_champion(double f, std::size_t size, const RunRecord& r, bool have) {
  if (!have) return true;
  if (f != r.champion_fitness) return f > r.champion_fitness;
  return size < r.champion_size;
}

}  // namespace

RunRecord evolve(const ExperimentConfig& cfg, std::uint64_t seed, Population pop, long evaluations_spent,
                 const GenerationHook& hook) {
  check_config(cfg);
  auto env = make_environment(cfg.environment);
  const Evaluator eval = environment_evaluator(*env);
  TuningConfig tcfg;
  tcfg.base_max_attempts = cfg.base_max_attempts;
  MutationContext mctx{env->sensors(), env->actuators(), cfg.k_ratio, cfg.catalog, 10};

  RunRecord rec;
  rec.seed = seed;
  rec.evaluations = evaluations_spent;
  bool have_champion = false;
  if (!pop.genomes.empty()) {
    rec.champion = pop.genomes.front();
    rec.champion_size = rec.champion.neuron_count();
  }

  std::uint64_t next_dxnn = 1;
  for (const auto& g : pop.genomes) next_dxnn = std::max(next_dxnn, g.dxnn_id.value + 1);

  while (rec.evaluations < cfg.max_evaluations) {
    if (pop.genomes.empty()) {
      rec.note = "extinct";
      break;
    }
    const auto generation = static_cast<std::uint64_t>(pop.generation_counter);
    const long budget = cfg.max_evaluations - rec.evaluations;
    const std::uint64_t stream = derive_seed(seed, {generation, kTuneStream});
    auto tuned = cfg.workers > 1 ? tune_population_parallel(pop.genomes, eval, tcfg, stream, budget, cfg.workers)
                                 : tune_population_serial(pop.genomes, eval, tcfg, stream, budget);
    rec.evaluations += tuned.evaluations;
    ++rec.generations;

    for (const auto& o : tuned.outcomes) {
      if (o.evaluations_used == 0) continue;
      const auto size = o.best_genome.neuron_count();
      if (better_champion(o.best_fitness, size, rec, have_champion)) {
        rec.champion = o.best_genome;
        rec.champion_fitness = o.best_fitness;
        rec.champion_size = size;
        have_champion = true;
      }
    }
    if (tuned.solved_index) {
      const auto& o = tuned.outcomes[*tuned.solved_index];
      rec.solved = true;
      rec.champion = o.best_genome;
      rec.champion_fitness = o.best_fitness;
      rec.champion_size = o.best_genome.neuron_count();
      break;
    }
    if (rec.evaluations >= cfg.max_evaluations) break;

    std::vector<ScoredGenome> scored;
    for (const auto& o : tuned.outcomes)
      scored.push_back({o.best_genome, o.best_fitness, o.best_genome.neuron_count()});
    std::vector<Allotment> allot;
    try {
      allot = competition_select(scored, cfg.population_limit);
    } catch (const DegeneratePopulation&) {
      rec.note = "extinct";
      break;
    }

    Rng mrng = make_rng(seed, {generation, kMutateStream});
    auto offspring = [&](const Genome& parent, NodeId id) {
      for (int attempt = 0;; ++attempt) {
        try {
          return mutate_offspring(parent, id, mctx, mrng);
        } catch (const MutationError&) {
          if (attempt >= 9) throw;
        }
      }
    };
    Population next;
    next.population_id = pop.population_id;
    next.generation_counter = pop.generation_counter + 1;
    next.genomes = apply_allotments(scored, allot, offspring, next_dxnn);
    pop = std::move(next);
    if (hook) hook(pop, rec.evaluations);
  }
  return rec;
}

RunRecord run_once(const ExperimentConfig& cfg, std::uint64_t seed, const GenerationHook& hook) {
  check_config(cfg);
  Rng rng = make_rng(seed, {0x73656564});
  return evolve(cfg, seed, seed_population(cfg, rng), 0, hook);
}

ExperimentReport summarize(EnvKind env, std::vector<RunRecord> runs) {
  ExperimentReport r;
  r.environment = env;
  r.runs = std::move(runs);
  std::vector<double> evals;
  for (const auto& run : r.runs) {
    if (!run.solved) continue;
    evals.push_back(static_cast<double>(run.evaluations));
    ++r.size_histogram[run.champion_size];
  }
  if (!r.runs.empty()) r.solve_rate = static_cast<double>(evals.size()) / static_cast<double>(r.runs.size());
  if (!evals.empty()) {
    const double n = static_cast<double>(evals.size());
    r.mean_evaluations = std::accumulate(evals.begin(), evals.end(), 0.0) / n;
    std::sort(evals.begin(), evals.end());
    const std::size_t mid = evals.size() / 2;
    r.median_evaluations = evals.size() % 2 ? evals[mid] : (evals[mid - 1] + evals[mid]) / 2;
    if (evals.size() > 1) {
      double ss = 0.0;
      for (double e : evals) ss += (e - r.mean_evaluations) * (e - r.mean_evaluations);
      r.stddev_evaluations = std::sqrt(ss / (n - 1));
    }
  }
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  check_config(cfg);
  std::vector<RunRecord> runs(static_cast<std::size_t>(cfg.runs));
  std::vector<std::exception_ptr> errors(runs.size());
  // Whole runs go to the workers; each run then tunes serially.
  ExperimentConfig inner = cfg;
  if (cfg.runs > 1) inner.workers = 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.workers) if (cfg.runs > 1 && cfg.workers > 1)
  for (int i = 0; i < cfg.runs; ++i) {
    try {
      auto& rec = runs[static_cast<std::size_t>(i)];
      rec = run_once(inner, run_seed(cfg.master_seed, i));
      rec.run = i;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize(cfg.environment, std::move(runs));
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "run,seed,solved,evaluations,champion_size,generations,champion_fitness,note\n";
  for (const auto& run : r.runs) {
    os << run.run << ',' << run.seed << ',' << (run.solved ? 1 : 0) << ',' << run.evaluations << ','
       << run.champion_size << ',' << run.generations << ',' << num(run.champion_fitness) << ',' << run.note << '\n';
  }
  return os.str();
}

std::string report_summary(const ExperimentReport& r) {
  std::ostringstream os;
  std::size_t solved = 0;
  for (const auto& run : r.runs) solved += run.solved ? 1 : 0;
  os << "environment: " << to_string(r.environment) << '\n';
  os << "runs: " << r.runs.size() << '\n';
  os << "solved: " << solved << '\n';
  os << "solve_rate: " << fixed(r.solve_rate, 4) << '\n';
  os << "evaluations_mean: " << fixed(r.mean_evaluations, 1) << '\n';
  os << "evaluations_median: " << fixed(r.median_evaluations, 1) << '\n';
  os << "evaluations_stddev: " << fixed(r.stddev_evaluations, 1) << '\n';
  os << "champion_size_histogram:\n";
  for (const auto& [size, count] : r.size_histogram) os << "  " << size << " neurons: " << count << '\n';
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "champions", ec);
  if (ec) throw std::runtime_error("cannot create '" + (dir / "champions").string() + "': " + ec.message());
  write_text(dir / "report.csv", report_csv(r));
  write_text(dir / "summary.txt", report_summary(r));
  for (const auto& run : r.runs) {
    Population p;
    p.population_id = NodeId{static_cast<std::uint64_t>(run.run) + 1};
    p.genomes.push_back(run.champion);
    snapshot(p, dir / "champions" / ("run_" + std::to_string(run.run) + ".dxnn"));
  }
}

void snapshot(const Population& pop, const std::filesystem::path& path) { write_text(path, serialize(pop)); }

Population restore(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line, path.string() + ": " + (std::string(e.what()).substr(std::string(e.what()).find(": ") + 2)));
  } catch (const ReferenceError& e) {
    throw ReferenceError(path.string() + ": " + e.what());
  }
}

}  // namespace dxnn
