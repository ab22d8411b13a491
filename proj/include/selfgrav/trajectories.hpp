#pragma once

#include <array>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/potential.hpp"

namespace selfgrav {

/// Sign of the Stern-Gerlach gradient: +1 on [0,T1] and [T4,T5], 0 on
/// [T2,T3], -1 on [T1,T2] and [T3,T4]. Shared endpoints take the first
/// matching row in that order (T1 -> +1, T2 -> 0, T3 -> 0, T4 -> +1).
/// Throws ValidationError outside [0,T5].
int lambda_of_t(double t, const Protocol& protocol);

/// One constant-force stretch of the + branch, in vertex form
/// <z>(t) = z_vertex + accel/2 (t - t_vertex)^2, <p>(t) = m accel (t - t_vertex).
/// The - branch is the mirror image.
struct MotionSegment {
  double t0 = 0.0, t1 = 0.0;
  int lambda = 0;
  double t_vertex = 0.0;
  double z_vertex = 0.0;
  double accel = 0.0;

  [[nodiscard]] double z(double t) const {
    const double tau = t - t_vertex;
    return z_vertex + 0.5 * accel * tau * tau;
  }
  [[nodiscard]] double velocity(double t) const { return accel * (t - t_vertex); }
};

/// The five segments of the + branch trajectory. Self-gravity exerts no net
/// force on a packet, so only m, g mu_B, B0' and the T_i enter.
std::array<MotionSegment, 5> motion_segments(const ExperimentConfig& config);

struct MeanState {
  double mean_z = 0.0;  ///< m
  double mean_p = 0.0;  ///< kg m/s
  double t = 0.0;
  Branch branch = Branch::Plus;
};

/// Ehrenfest means of one branch. Throws ValidationError outside [0,T5].
MeanState mean_state(Branch branch, double t, const ExperimentConfig& config);

/// |<z>_+ - <z>_-| = 2 |<z>_+|.
double branch_distance(double t, const ExperimentConfig& config);

/// Maximal time interval on which the branches are either overlapping
/// (d <= 2R) or separated.
struct RegimeInterval {
  double t0 = 0.0, t1 = 0.0;
  bool separated = false;
};

/// Times in (0,T5) at which d(t) = 2R, ascending.
std::vector<double> separation_crossings(const ExperimentConfig& config);

/// Partition of [0,T5] into overlap / separated intervals.
std::vector<RegimeInterval> regime_intervals(const ExperimentConfig& config);

/// Integral of 1/d(t) over [ta, tb], which must lie where d > 0.
/// Evaluated segment by segment in closed form.
double inverse_distance_integral(double ta, double tb, const ExperimentConfig& config);

/// Closed-form integral of 1/(z_vertex + accel/2 (t - t_vertex)^2) over
/// [ta, tb]; the quadratic must not vanish on the interval.
double inverse_quadratic_integral(const MotionSegment& seg, double ta, double tb);

/// Classical action of one branch, split so that differences between the
/// branches can be formed term by term without cancellation:
/// S = kinetic - gradient - uniform.
struct ClassicalAction {
  double kinetic = 0.0;   ///< int <p>^2 / 2m dt
  double gradient = 0.0;  ///< int -/+ lambda (g mu_B/2) B0' <z> dt
  double uniform = 0.0;   ///< int +/- lambda (g mu_B/2) B0 dt

  [[nodiscard]] double total() const { return kinetic - gradient - uniform; }
};

/// Action accumulated on [0,t].
ClassicalAction classical_action(Branch branch, const ExperimentConfig& config, double t);

/// Action over the whole protocol.
ClassicalAction classical_action(Branch branch, const ExperimentConfig& config);

}  // namespace selfgrav
