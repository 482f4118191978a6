#include "dxnn/environments.hpp"

#include <algorithm>
#include <cmath>

#include "dxnn/errors.hpp"

namespace dxnn {

EvalResult evaluate_genome(const Environment& env, const Genome& g) {
  Phenotype p = compile(g);
  return env.evaluate(p);
}

// ---- XOR ----

EvalResult xor_evaluate(Phenotype& p) {
  if (p.sensor_width() != 2 || p.actuator_width() != 1)
    throw InputError("xor needs a length-2 sensor and a length-1 actuator");
  static constexpr double cases[4][3] = {{-1, -1, -1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
  EvalResult r;
  bool all_ok = true;
  double out = 0.0;
  for (const auto& c : cases) {
    p.reset();
    const double in[2] = {c[0], c[1]};
    p.cycle_into(in, std::span<double>(&out, 1));
    const double err = std::abs(c[2] - out);
    r.fitness += 1.0 - err * err / 4.0;
    if (!(err < 0.2 && (out > 0) == (c[2] > 0))) all_ok = false;
    r.control_steps += 1;
  }
  r.solved = all_ok;
  return r;
}

EvalResult XorEnvironment::evaluate(Phenotype& p) const { return xor_evaluate(p); }

// ---- cart pole ----

StateDerivative cartpole_derivatives(const CartPoleState& s, double force) {
  using namespace cartpole;
  double fi_sum = 0.0, mi_sum = 0.0;
  std::array<double, 2> cos_t{}, gsin_t{}, fric{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double ml = kPoleMass[i] * kHalfLength[i];
    cos_t[i] = std::cos(s.theta[i]);
    gsin_t[i] = kGravity * std::sin(s.theta[i]);
    fric[i] = kPoleFriction * s.theta_dot[i] / ml;
    fi_sum += ml * s.theta_dot[i] * s.theta_dot[i] * std::sin(s.theta[i]) +
              0.75 * kPoleMass[i] * cos_t[i] * (fric[i] + gsin_t[i]);
    mi_sum += kPoleMass[i] * (1.0 - 0.75 * cos_t[i] * cos_t[i]);
  }
  const double sgn = (s.x_dot > 0) - (s.x_dot < 0);
  const double x_acc = (force - kCartFriction * sgn + fi_sum) / (kCartMass + mi_sum);
  StateDerivative d{};
  d[0] = s.x_dot;
  d[1] = x_acc;
  for (std::size_t i = 0; i < 2; ++i) {
    d[2 + 2 * i] = s.theta_dot[i];
    d[3 + 2 * i] = -0.75 * (x_acc * cos_t[i] + gsin_t[i] + fric[i]) / kHalfLength[i];
  }
  return d;
}

namespace {

CartPoleState offset(const CartPoleState& s, const StateDerivative& d, double h) {
  CartPoleState r = s;
  r.x += h * d[0];
  r.x_dot += h * d[1];
  for (std::size_t i = 0; i < 2; ++i) {
    r.theta[i] += h * d[2 + 2 * i];
    r.theta_dot[i] += h * d[3 + 2 * i];
  }
  return r;
}

}  // namespace

CartPoleState rk4_step(const CartPoleState& s, double force, double h) {
  const auto k1 = cartpole_derivatives(s, force);
  const auto k2 = cartpole_derivatives(offset(s, k1, h / 2), force);
  const auto k3 = cartpole_derivatives(offset(s, k2, h / 2), force);
  const auto k4 = cartpole_derivatives(offset(s, k3, h), force);
  StateDerivative d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6.0;
  return offset(s, d, h);
}

CartPoleState initial_cartpole_state() {
  CartPoleState s;
  s.theta[0] = 4.0 * 3.14159265358979323846 / 180.0;
  return s;
}

bool cartpole_failed(const CartPoleState& s) {
  using namespace cartpole;
  return std::abs(s.x) > kTrackLimit || std::abs(s.theta[0]) > kAngleLimit || std::abs(s.theta[1]) > kAngleLimit;
}

double output_to_force(double o) {
  using namespace cartpole;
  double f = std::clamp(kMaxForce * o, -kMaxForce, kMaxForce);
  if (std::abs(f) < kMinForce) f = f < 0 ? -kMinForce : kMinForce;
  return f;
}

EvalResult dpb_evaluate(Phenotype& p, const DpbConfig& cfg, std::ostream* trace) {
  const std::size_t width = cfg.with_velocities ? 6 : 3;
  if (p.sensor_width() != width || p.actuator_width() != 1)
    throw InputError("dpb expects " + std::to_string(width) + " sensor values and one actuator value");
  const int substeps = static_cast<int>(std::lround(cfg.control_period / cfg.integration_step));

  constexpr std::size_t kWindow = 100;
  std::array<double, kWindow> recent{};

  CartPoleState s = initial_cartpole_state();
  std::array<double, 6> in{};
  double out = 0.0;
  if (trace) {
    trace->precision(17);
    *trace << "step,x,x_dot,theta1,theta1_dot,theta2,theta2_dot,force\n";
  }

  long t = 0;
  while (t < cfg.success_steps) {
    if (cfg.with_velocities) {
      in = {s.x / 2.4, s.x_dot / 10.0, s.theta[0] / 0.6283, s.theta_dot[0] / 5.0, s.theta[1] / 0.6283,
            s.theta_dot[1] / 5.0};
    } else {
      in[0] = s.x / 2.4;
      in[1] = s.theta[0] / 0.6283;
      in[2] = s.theta[1] / 0.6283;
    }
    p.cycle_into(std::span<const double>(in.data(), width), std::span<double>(&out, 1));
    const double force = output_to_force(std::isfinite(out) ? out : 0.0);

    CartPoleState next = s;
    for (int k = 0; k < substeps; ++k) next = rk4_step(next, force, cfg.integration_step);
    const bool finite = std::isfinite(next.x) && std::isfinite(next.x_dot) && std::isfinite(next.theta[0]) &&
                        std::isfinite(next.theta[1]) && std::isfinite(next.theta_dot[0]) &&
                        std::isfinite(next.theta_dot[1]);
    if (!finite || cartpole_failed(next)) break;
    s = next;
    ++t;
    s.steps = t;

    const double dev = std::abs(s.x) + std::abs(s.x_dot) + std::abs(s.theta[0]) + std::abs(s.theta_dot[0]);
    recent[static_cast<std::size_t>(t) % kWindow] = dev;

    if (trace)
      *trace << t << ',' << s.x << ',' << s.x_dot << ',' << s.theta[0] << ',' << s.theta_dot[0] << ','
             << s.theta[1] << ',' << s.theta_dot[1] << ',' << force << '\n';
  }

  EvalResult r;
  r.control_steps = t;
  r.solved = t >= cfg.success_steps;
  if (cfg.fitness_kind == FitnessKind::undamped) {
    r.fitness = static_cast<double>(t);
  } else {
    const double f1 = static_cast<double>(t) / 1000.0;
    double f2 = 0.0;
    if (t >= static_cast<long>(kWindow)) {
      double sum = 0.0;
      for (double v : recent) sum += v;
      f2 = sum > 0 ? 0.75 / sum : 0.0;
    }
    r.fitness = 0.1 * f1 + 0.9 * f2;
  }
  return r;
}

std::string DpbEnvironment::name() const {
  if (cfg_.with_velocities) return "dpb_v";
  return cfg_.fitness_kind == FitnessKind::damped ? "dpb_nv_damped" : "dpb_nv_undamped";
}

std::vector<SensorSpec> DpbEnvironment::sensors() const {
  if (cfg_.with_velocities) return {{"cart_pole_state", 6}};
  return {{"cart_pole_position", 3}};
}

std::string_view to_string(EnvKind k) {
  switch (k) {
    case EnvKind::xor_gate: return "xor";
    case EnvKind::dpb_v: return "dpb_v";
    case EnvKind::dpb_nv_undamped: return "dpb_nv_undamped";
    case EnvKind::dpb_nv_damped: return "dpb_nv_damped";
  }
  return "?";
}

std::optional<EnvKind> parse_env_kind(std::string_view s) {
  for (auto k : {EnvKind::xor_gate, EnvKind::dpb_v, EnvKind::dpb_nv_undamped, EnvKind::dpb_nv_damped})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::unique_ptr<Environment> make_environment(EnvKind k) {
  switch (k) {
    case EnvKind::xor_gate: return std::make_unique<XorEnvironment>();
    case EnvKind::dpb_v: return std::make_unique<DpbEnvironment>(DpbConfig{});
    case EnvKind::dpb_nv_undamped: {
      DpbConfig c;
      c.with_velocities = false;
      return std::make_unique<DpbEnvironment>(c);
    }
    case EnvKind::dpb_nv_damped: {
      DpbConfig c;
      c.with_velocities = false;
      c.fitness_kind = FitnessKind::damped;
      return std::make_unique<DpbEnvironment>(c);
    }
  }
  throw ConfigError("unknown environment");
}

}  // namespace dxnn
