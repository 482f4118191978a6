#pragma once

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dxnn/genome.hpp"
#include "dxnn/phenotype.hpp"

namespace dxnn {

struct EvalResult {
  double fitness = 0.0;  // >= 0
  bool solved = false;
  long control_steps = 0;
};

/// Fitness environment. Stateless: every evaluate call owns its episode,
/// so one instance may serve concurrent callers.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::string name() const = 0;
  virtual std::vector<SensorSpec> sensors() const = 0;
  virtual std::vector<ActuatorSpec> actuators() const = 0;
  virtual EvalResult evaluate(Phenotype& p) const = 0;
};

/// compile + evaluate.
EvalResult evaluate_genome(const Environment& env, const Genome& g);

// ---- XOR ----

/// Inputs and targets in {-1, 1}. Each case runs from a reset network.
/// fitness = sum over cases of 1 - (target - output)^2 / 4; solved when
/// every output has the target's sign and |target - output| < 0.2.
class XorEnvironment final : public Environment {
 public:
  std::string name() const override { return "xor"; }
  std::vector<SensorSpec> sensors() const override { return {{"xor_input", 2}}; }
  std::vector<ActuatorSpec> actuators() const override { return {{"xor_output", 1}}; }
  EvalResult evaluate(Phenotype& p) const override;
};

EvalResult xor_evaluate(Phenotype& p);

// ---- double pole balancing ----

namespace cartpole {

inline constexpr double kCartMass = 1.0;
inline constexpr std::array<double, 2> kPoleMass{0.1, 0.01};
inline constexpr std::array<double, 2> kHalfLength{0.5, 0.05};
// Signed so that a tilted pole accelerates away from vertical.
inline constexpr double kGravity = -9.81;
inline constexpr double kCartFriction = 0.0005;
inline constexpr double kPoleFriction = 0.000002;
inline constexpr double kTrackLimit = 2.4;
inline constexpr double kAngleLimit = 36.0 * 3.14159265358979323846 / 180.0;
inline constexpr double kMaxForce = 10.0;
inline constexpr double kMinForce = 10.0 / 256.0;

}  // namespace cartpole

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  std::array<double, 2> theta{};
  std::array<double, 2> theta_dot{};
  long steps = 0;
};

/// Time derivative of (x, x_dot, theta1, theta1_dot, theta2, theta2_dot).
using StateDerivative = std::array<double, 6>;

StateDerivative cartpole_derivatives(const CartPoleState& s, double force);

/// Classical fourth-order Runge-Kutta with the force held over the step.
CartPoleState rk4_step(const CartPoleState& s, double force, double h);

/// Long pole at 4 degrees, everything else at rest.
CartPoleState initial_cartpole_state();

bool cartpole_failed(const CartPoleState& s);

enum class FitnessKind { undamped, damped };

struct DpbConfig {
  double integration_step = 0.01;
  double control_period = 0.02;
  long success_steps = 100000;
  bool with_velocities = true;
  FitnessKind fitness_kind = FitnessKind::undamped;
};

/// Network output o in (-1,1) becomes force 10*o, pushed out to at least
/// 10/256 N in magnitude (sign kept; zero maps to +).
double output_to_force(double o);

/// Optional per-step CSV sink: step,x,x_dot,theta1,theta1_dot,theta2,theta2_dot,force
EvalResult dpb_evaluate(Phenotype& p, const DpbConfig& cfg, std::ostream* trace = nullptr);

class DpbEnvironment final : public Environment {
 public:
  explicit DpbEnvironment(DpbConfig cfg) : cfg_(cfg) {}
  std::string name() const override;
  std::vector<SensorSpec> sensors() const override;
  std::vector<ActuatorSpec> actuators() const override { return {{"cart_force", 1}}; }
  EvalResult evaluate(Phenotype& p) const override { return dpb_evaluate(p, cfg_); }
  const DpbConfig& config() const { return cfg_; }

 private:
  DpbConfig cfg_;
};

enum class EnvKind { xor_gate, dpb_v, dpb_nv_undamped, dpb_nv_damped };

std::string_view to_string(EnvKind k);
std::optional<EnvKind> parse_env_kind(std::string_view s);
std::unique_ptr<Environment> make_environment(EnvKind k);

}  // namespace dxnn
