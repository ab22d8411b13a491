#include "selfgrav/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "selfgrav/errors.hpp"

namespace selfgrav {
namespace {

double checked_time(double t, const Protocol& p, const char* who) {
  if (!(t >= -kTimeTolerance && t <= p.T5 + kTimeTolerance)) {
    std::ostringstream os;
    os << who << ": t = " << t << " s outside [0, T5 = " << p.T5 << " s]";
    throw ValidationError(os.str());
  }
  return std::clamp(t, 0.0, p.T5);
}

std::size_t segment_index(double t, const std::array<MotionSegment, 5>& segs) {
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    if (t < segs[i].t1) return i;
  }
  return segs.size() - 1;
}

// atan(sqrt(w))/sqrt(w) for w >= 0, atanh(sqrt(-w))/sqrt(-w) for w < 0.
double arctan_ratio(double w) {
  if (std::abs(w) < 1e-6) return 1.0 - w / 3.0 + w * w / 5.0 - w * w * w / 7.0;
  if (w > 0.0) {
    const double r = std::sqrt(w);
    return std::atan(r) / r;
  }
  const double r = std::sqrt(-w);
  return std::atanh(r) / r;
}

}  // namespace

int lambda_of_t(double t, const Protocol& p) {
  t = checked_time(t, p, "lambda_of_t");
  if (t <= p.T1 || t >= p.T4) return 1;
  if (t >= p.T2 && t <= p.T3) return 0;
  return -1;
}

std::array<MotionSegment, 5> motion_segments(const ExperimentConfig& config) {
  const auto& p = config.protocol;
  const double a = 0.5 * config.constants.g_mu_B() * p.B0_grad / config.sphere.mass;
  const double plateau = a * p.T1 * p.T1;
  return {{
      {0.0, p.T1, 1, 0.0, 0.0, a},
      {p.T1, p.T2, -1, p.T2, plateau, -a},
      {p.T2, p.T3, 0, p.T2, plateau, 0.0},
      {p.T3, p.T4, -1, p.T3, plateau, -a},
      {p.T4, p.T5, 1, p.T5, 0.0, a},
  }};
}

MeanState mean_state(Branch branch, double t, const ExperimentConfig& config) {
  t = checked_time(t, config.protocol, "mean_state");
  const auto segs = motion_segments(config);
  const auto& seg = segs[segment_index(t, segs)];
  const double s = sign(branch);
  return {s * seg.z(t), s * config.sphere.mass * seg.velocity(t), t, branch};
}

double branch_distance(double t, const ExperimentConfig& config) {
  return 2.0 * std::abs(mean_state(Branch::Plus, t, config).mean_z);
}

std::vector<double> separation_crossings(const ExperimentConfig& config) {
  const double R = config.sphere.radius;
  const double T5 = config.protocol.T5;
  std::vector<double> roots;
  for (const auto& seg : motion_segments(config)) {
    if (seg.accel == 0.0) continue;
    const double tau2 = 2.0 * (R - seg.z_vertex) / seg.accel;
    if (tau2 < 0.0) continue;
    const double tau = std::sqrt(tau2);
    for (double t : {seg.t_vertex - tau, seg.t_vertex + tau}) {
      if (t >= seg.t0 && t <= seg.t1 && t > 0.0 && t < T5) roots.push_back(t);
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [T5](double a, double b) { return b - a <= 1e-15 * T5; }),
              roots.end());
  return roots;
}

std::vector<RegimeInterval> regime_intervals(const ExperimentConfig& config) {
  std::vector<double> cuts{0.0};
  for (double t : separation_crossings(config)) cuts.push_back(t);
  cuts.push_back(config.protocol.T5);

  const double two_r = 2.0 * config.sphere.radius;
  std::vector<RegimeInterval> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const bool separated = branch_distance(mid, config) > two_r;
    if (!out.empty() && out.back().separated == separated) {
      out.back().t1 = cuts[i + 1];
    } else {
      out.push_back({cuts[i], cuts[i + 1], separated});
    }
  }
  return out;
}

double inverse_quadratic_integral(const MotionSegment& seg, double ta, double tb) {
  if (tb <= ta) return 0.0;
  if (seg.accel == 0.0) return (tb - ta) / seg.z_vertex;

  const double tau_a = ta - seg.t_vertex;
  const double tau_b = tb - seg.t_vertex;
  if (tau_a < 0.0 && tau_b > 0.0) {
    return inverse_quadratic_integral(seg, ta, seg.t_vertex) +
           inverse_quadratic_integral(seg, seg.t_vertex, tb);
  }
  // 1/z = (2/a) / (tau^2 + sigma); the arctangent (or area tanh) difference
  // is folded into a single argument so sigma -> 0 stays well conditioned.
  const double sigma = 2.0 * seg.z_vertex / seg.accel;
  const double denom = tau_a * tau_b + sigma;
  const double ratio = (tau_b - tau_a) / denom;
  return 2.0 / seg.accel * ratio * arctan_ratio(sigma * ratio * ratio);
}

double inverse_distance_integral(double ta, double tb, const ExperimentConfig& config) {
  double sum = 0.0;
  for (const auto& seg : motion_segments(config)) {
    const double lo = std::max(ta, seg.t0);
    const double hi = std::min(tb, seg.t1);
    if (hi > lo) sum += inverse_quadratic_integral(seg, lo, hi);
  }
  return 0.5 * sum;
}

ClassicalAction classical_action(Branch branch, const ExperimentConfig& config, double t) {
  const auto& p = config.protocol;
  t = checked_time(t, p, "classical_action");
  const double m = config.sphere.mass;
  const double s = sign(branch);
  const double half_gmu = 0.5 * config.constants.g_mu_B();

  ClassicalAction action;
  for (const auto& seg : motion_segments(config)) {
    if (t <= seg.t0) break;
    const bool full = t >= seg.t1;
    const double end = full ? seg.t1 : t;
    const double ta = seg.t0 - seg.t_vertex;
    const double tb = end - seg.t_vertex;
    const double cubes = (tb - ta) * (tb * tb + ta * tb + ta * ta);

    action.kinetic += m * seg.accel * seg.accel * cubes / 6.0;
    const double z_integral = s * (seg.z_vertex * (tb - ta) + seg.accel * cubes / 6.0);
    action.gradient += (-s * seg.lambda * half_gmu * p.B0_grad) * z_integral;
    // Full ramps use the nominal length T1 so that the uniform-field phase
    // cancels exactly over a recombining protocol.
    const double length = (full && seg.lambda != 0) ? p.T1 : end - seg.t0;
    action.uniform += s * seg.lambda * half_gmu * p.B0 * length;
  }
  return action;
}

ClassicalAction classical_action(Branch branch, const ExperimentConfig& config) {
  return classical_action(branch, config, config.protocol.T5);
}

}  // namespace selfgrav
