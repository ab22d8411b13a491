#include "selfgrav/config.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "selfgrav/errors.hpp"

namespace selfgrav {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_positive(ValidationReport& report, const std::string& what,
                    double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    report.violations.push_back({what + " > 0", what + " = " + fmt(value)});
  }
}

void check_non_negative(ValidationReport& report, const std::string& what,
                        double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    report.violations.push_back({what + " >= 0", what + " = " + fmt(value)});
  }
}

}  // namespace

Protocol Protocol::recombining(double T1, double plateau, double B0_grad,
                               double B0) {
  Protocol p;
  p.T1 = T1;
  p.T2 = 2.0 * T1;
  p.T3 = p.T2 + plateau;
  p.T4 = p.T3 + T1;
  p.T5 = p.T4 + T1;
  p.B0 = B0;
  p.B0_grad = B0_grad;
  return p;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "pass";
  std::ostringstream os;
  os << "fail:";
  for (const auto& v : violations) {
    os << "\n  - " << v.invariant << " (" << v.detail << ")";
  }
  return os.str();
}

ValidationReport validate(const ExperimentConfig& config) {
  ValidationReport report;
  const auto& c = config.constants;
  // G = 0 switches self-gravity off, the control case of every symmetry check.
  check_non_negative(report, "constants.G", c.G);
  check_positive(report, "constants.hbar", c.hbar);
  check_positive(report, "constants.mu_B", c.mu_B);
  check_positive(report, "constants.g_factor", c.g_factor);

  check_positive(report, "sphere.mass", config.sphere.mass);
  check_positive(report, "sphere.radius", config.sphere.radius);

  const auto& w = config.weights;
  for (auto [name, value] : {std::pair{"weights.beta_plus_sq", w.beta_plus_sq},
                             std::pair{"weights.beta_minus_sq", w.beta_minus_sq}}) {
    if (!(value >= 0.0 && value <= 1.0)) {
      report.violations.push_back(
          {std::string(name) + " in [0,1]", std::string(name) + " = " + fmt(value)});
    }
  }
  if (std::abs(w.beta_plus_sq + w.beta_minus_sq - 1.0) > kWeightTolerance) {
    report.violations.push_back(
        {"beta_plus_sq + beta_minus_sq = 1",
         "sum = " + fmt(w.beta_plus_sq + w.beta_minus_sq)});
  }

  const auto& p = config.protocol;
  if (!(0.0 < p.T1 && p.T1 < p.T2 && p.T2 <= p.T3 && p.T3 < p.T4 && p.T4 < p.T5)) {
    report.violations.push_back(
        {"0 < T1 < T2 <= T3 < T4 < T5",
         "T = (" + fmt(p.T1) + ", " + fmt(p.T2) + ", " + fmt(p.T3) + ", " +
             fmt(p.T4) + ", " + fmt(p.T5) + ")"});
  }
  const double ramps[] = {p.T2 - p.T1, p.T4 - p.T3, p.T5 - p.T4};
  const char* labels[] = {"T2-T1", "T4-T3", "T5-T4"};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ramps[i] - p.T1) > kTimeTolerance) {
      report.violations.push_back(
          {"recombination constraint T2-T1 = T4-T3 = T5-T4 = T1",
           std::string(labels[i]) + " = " + fmt(ramps[i]) + " but T1 = " + fmt(p.T1)});
    }
  }
  check_positive(report, "protocol.B0_grad", p.B0_grad);
  if (!(p.B0 >= 0.0) || !std::isfinite(p.B0)) {
    report.violations.push_back({"protocol.B0 >= 0", "B0 = " + fmt(p.B0)});
  }

  check_positive(report, "initial.Q0", config.initial.Q0);
  return report;
}

void require_valid(const ExperimentConfig& config) {
  const auto report = validate(config);
  if (!report.ok()) throw ValidationError(report.to_string());
}

double omega_s(const SphereParams& sphere, const ConstantsSet& constants) {
  return std::sqrt(constants.G * sphere.mass /
                   (sphere.radius * sphere.radius * sphere.radius));
}

double separation_time(const ExperimentConfig& config) {
  return std::sqrt(4.0 * config.sphere.mass * config.sphere.radius /
                   (config.constants.g_mu_B() * config.protocol.B0_grad));
}

double omega_trap(const InitialState& initial, const SphereParams& sphere,
                  const ConstantsSet& constants) {
  return constants.hbar / (sphere.mass * initial.Q0);
}

ExperimentConfig baseline_config(const ConstantsSet& constants) {
  ExperimentConfig cfg;
  cfg.constants = constants;
  cfg.sphere = {5.5e-15, 1e-6};
  cfg.weights = SpinWeights::from_plus(1.0 / 3.0);
  cfg.protocol = Protocol::recombining(0.25, 1.0, 1e6);
  cfg.initial = InitialState::from_width(1e-9);
  return cfg;
}

ExperimentConfig short_protocol_config(const ConstantsSet& constants) {
  ExperimentConfig cfg = baseline_config(constants);
  cfg.protocol = Protocol::recombining(0.025, 0.1, 1e6);
  return cfg;
}

double density(const SphereParams& sphere) {
  const double r = sphere.radius;
  return sphere.mass / (4.0 / 3.0 * std::numbers::pi * r * r * r);
}

SphereParams sphere_at_density(double radius, double rho) {
  return {rho * 4.0 / 3.0 * std::numbers::pi * radius * radius * radius, radius};
}

}  // namespace selfgrav
