#include "selfgrav/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "selfgrav/errors.hpp"

namespace selfgrav {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double tanc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 3.0;
  return std::tan(x) / x;
}

double g_over_2x(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 0.1)
    return x2 * (1.0 / 3.0 -
                 x2 * (1.0 / 15.0 - x2 * (2.0 / 315.0 - x2 * (1.0 / 2835.0 - x2 * 2.0 / 155925.0))));
  return (x - std::sin(x) * std::cos(x)) / (2.0 * x);
}

double weight_sq(const SpinWeights& w, Branch b) {
  return b == Branch::Plus ? w.beta_plus_sq : w.beta_minus_sq;
}

}  // namespace

PhaseModel::PhaseModel(const ExperimentConfig& config)
    : config_((require_valid(config), config)),
      regimes_(regime_intervals(config)),
      plus_(config, Branch::Plus),
      minus_(config, Branch::Minus) {}

void PhaseModel::check_time(double t) const {
  if (!(t >= 0.0 && t <= config_.protocol.T5))
    throw ValidationError("time " + std::to_string(t) + " s outside [0, T5]");
}

double PhaseModel::nu_sq(Branch branch, bool separated) const {
  return separated ? weight_sq(config_.weights, branch) : 1.0;
}

double PhaseModel::const_self_integral(Branch branch, double t) const {
  const auto& s = config_.sphere;
  const double scale = 1.2 * config_.constants.G * s.mass * s.mass /
                       (s.radius * config_.constants.hbar);
  double acc = 0.0;
  for (const auto& r : regimes_) {
    if (r.t0 >= t) break;
    acc += nu_sq(branch, r.separated) * (std::min(r.t1, t) - r.t0);
  }
  return -scale * acc;
}

double PhaseModel::newton_integral(Branch branch, double t) const {
  const auto& s = config_.sphere;
  const double gm2 = config_.constants.G * s.mass * s.mass / config_.constants.hbar;
  double acc = 0.0;
  for (const auto& r : regimes_) {
    if (r.t0 >= t) break;
    if (!r.separated) continue;
    acc += (1.0 - nu_sq(branch, true)) * inverse_distance_integral(r.t0, std::min(r.t1, t), config_);
  }
  return -gm2 * acc;
}

double PhaseModel::const_self_difference(double t) const {
  const auto& s = config_.sphere;
  const double scale = 1.2 * config_.constants.G * s.mass * s.mass /
                       (s.radius * config_.constants.hbar);
  const double dw = config_.weights.beta_plus_sq - config_.weights.beta_minus_sq;
  double separated = 0.0;
  for (const auto& r : regimes_) {
    if (r.t0 >= t) break;
    if (r.separated) separated += std::min(r.t1, t) - r.t0;
  }
  return -scale * dw * separated;
}

double PhaseModel::newton_difference(double t) const {
  const auto& s = config_.sphere;
  const double gm2 = config_.constants.G * s.mass * s.mass / config_.constants.hbar;
  const double dw = config_.weights.beta_minus_sq - config_.weights.beta_plus_sq;
  double acc = 0.0;
  for (const auto& r : regimes_) {
    if (r.t0 >= t) break;
    if (r.separated) acc += inverse_distance_integral(r.t0, std::min(r.t1, t), config_);
  }
  return -gm2 * dw * acc;
}

double PhaseModel::f_quantum(Branch branch, double t) const {
  check_time(t);
  const BranchWidth& w = width(branch);
  const auto& s = config_.sphere;
  const double hbar = config_.constants.hbar;
  const double gm2 = config_.constants.G * s.mass * s.mass;
  const double Q = w.Q(t);
  const double omega = w.omega(t);
  const double d = branch_distance(t, config_);
  const double nu2 = d <= 2.0 * s.radius ? 1.0 : weight_sq(config_.weights, branch);
  double f = hbar * hbar / (4.0 * s.mass * Q) + 0.5 * s.mass * omega * omega * Q * nu2 -
             1.2 * gm2 / s.radius * nu2;
  if (nu2 < 1.0) f -= (1.0 - nu2) * gm2 / d;
  return f;
}

BranchPhase PhaseModel::imc(Branch branch, double t) const {
  check_time(t);
  const double hbar = config_.constants.hbar;
  const MeanState ms = mean_state(branch, t, config_);
  const BranchWidth& w = width(branch);
  BranchPhase p;
  p.boundary_zp = -ms.mean_z * ms.mean_p / hbar;
  p.boundary_width = -0.5 * ms.mean_z * ms.mean_z * w.A(t).imag();
  p.classical = classical_action(branch, config_, t).total() / hbar;
  p.i1 = w.i1(t);
  p.i2 = w.i2(t);
  p.const_self = const_self_integral(branch, t);
  p.newton_cross = newton_integral(branch, t);
  return p;
}

PhaseBreakdown PhaseModel::breakdown(double t) const {
  PhaseBreakdown b;
  b.t = t;
  b.plus = imc(Branch::Plus, t);
  b.minus = imc(Branch::Minus, t);

  const double hbar = config_.constants.hbar;
  const ClassicalAction sp = classical_action(Branch::Plus, config_, t);
  const ClassicalAction sm = classical_action(Branch::Minus, config_, t);
  const MeanState mp = mean_state(Branch::Plus, t, config_);

  b.diff.boundary_zp = b.plus.boundary_zp - b.minus.boundary_zp;
  b.diff.boundary_width =
      -0.5 * mp.mean_z * mp.mean_z * (plus_.A(t).imag() - minus_.A(t).imag());
  b.diff.classical =
      ((sp.kinetic - sm.kinetic) - (sp.gradient - sm.gradient) - (sp.uniform - sm.uniform)) / hbar;
  b.diff.i1 = b.plus.i1 - b.minus.i1;
  b.diff.i2 = b.plus.i2 - b.minus.i2;
  b.diff.const_self = const_self_difference(t);
  b.diff.newton_cross = newton_difference(t);
  b.delta_phi = b.diff.total();
  return b;
}

double f_quantum(Branch branch, double t, const ExperimentConfig& config) {
  return PhaseModel(config).f_quantum(branch, t);
}

BranchPhase imc(Branch branch, double t, const ExperimentConfig& config) {
  return PhaseModel(config).imc(branch, t);
}

double delta_phi(double t, const ExperimentConfig& config) {
  return PhaseModel(config).delta_phi(t);
}

double i1_closed(double t, double nu, const ExperimentConfig& config) {
  const double hbar = config.constants.hbar;
  const double m = config.sphere.mass;
  const double Q0 = config.initial.Q0;
  const double th = nu * omega_s(config.sphere, config.constants) * t;
  // hbar tan(th) / (2 m nu Q0 w) = hbar t tanc(th) / (2 m Q0)
  const double poles = std::floor(th / std::numbers::pi + 0.5);
  const double x = hbar * t * tanc(th) / (2.0 * m * Q0);
  return 0.5 * (std::atan(x) + poles * std::numbers::pi);
}

double i2_closed(double t, double nu, const ExperimentConfig& config) {
  const double hbar = config.constants.hbar;
  const double m = config.sphere.mass;
  const double Q0 = config.initial.Q0;
  const double W = nu * omega_s(config.sphere, config.constants);
  const double th = W * t;
  return m * W * W * Q0 / (4.0 * hbar) * t * (1.0 + sinc(2.0 * th)) +
         hbar / (8.0 * m * Q0) * t * g_over_2x(th);
}

double naive_estimate(const ExperimentConfig& config) {
  const auto& s = config.sphere;
  const double rate = config.constants.G * s.mass * s.mass / (config.constants.hbar * s.radius);
  return 1.2 * rate * (config.protocol.T5 - 2.0 * separation_time(config)) *
         (config.weights.beta_plus_sq - config.weights.beta_minus_sq);
}

double short_protocol_estimate(const ExperimentConfig& config) {
  return naive_estimate(config) * (1.2 - 0.5) / 1.2;
}

double i2_difference_estimate(const ExperimentConfig& config) {
  const double w = omega_s(config.sphere, config.constants);
  const double span = config.protocol.T5 - separation_time(config);
  return omega_trap(config.initial, config.sphere, config.constants) * w * w * span * span *
         span / 24.0 * (config.weights.beta_minus_sq - config.weights.beta_plus_sq);
}

PhaseCurve phase_curve(const PhaseModel& model, std::size_t samples) {
  if (samples < 2) throw ValidationError("phase curve needs at least two samples");
  const double T5 = model.config().protocol.T5;
  PhaseCurve c;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? T5 : T5 * double(k) / double(samples - 1);
    const PhaseBreakdown b = model.breakdown(t);
    c.t.push_back(t);
    c.delta_phi.push_back(b.delta_phi);
    c.i1_diff.push_back(b.diff.i1);
    c.i2_diff.push_back(b.diff.i2);
    c.const_self_diff.push_back(b.diff.const_self);
    c.newton_diff.push_back(b.diff.newton_cross);
    c.classical_diff.push_back(b.diff.classical);
    c.boundary_diff.push_back(b.diff.boundary_zp + b.diff.boundary_width);
  }
  return c;
}

std::vector<SweepPoint> radius_sweep(const ExperimentConfig& config,
                                     const std::vector<double>& radii, int jobs) {
  const double rho = density(config.sphere);
  std::vector<SweepPoint> out(radii.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < radii.size(); ++i) {
    SweepPoint& p = out[i];
    p.radius = radii[i];
    try {
      if (!(radii[i] > 0.0)) throw ValidationError("radius must be positive");
      ExperimentConfig c = config;
      c.sphere = sphere_at_density(radii[i], rho);
      p.mass = c.sphere.mass;
      p.delta_phi = PhaseModel(c).delta_phi(c.protocol.T5);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  }
  return out;
}

}  // namespace selfgrav
