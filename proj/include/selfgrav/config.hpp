#pragma once

#include <string>
#include <vector>

#include "selfgrav/constants.hpp"

namespace selfgrav {

struct SphereParams {
  double mass = 0.0;    ///< kg
  double radius = 0.0;  ///< m
};

/// Squared moduli of the spin amplitudes, |beta_+|^2 and |beta_-|^2.
struct SpinWeights {
  double beta_plus_sq = 0.5;
  double beta_minus_sq = 0.5;

  static SpinWeights from_plus(double beta_plus_sq) {
    return {beta_plus_sq, 1.0 - beta_plus_sq};
  }
};

/// Stern-Gerlach schedule. The gradient pushes the branches apart on
/// [0,T1], back on [T1,T2], is off on [T2,T3], pushes together on [T3,T4]
/// and stops them on [T4,T5].
struct Protocol {
  double T1 = 0.0, T2 = 0.0, T3 = 0.0, T4 = 0.0, T5 = 0.0;  ///< s
  double B0 = 0.0;       ///< T
  double B0_grad = 0.0;  ///< T/m

  /// Builds the recombining schedule from the ramp length and the plateau.
  static Protocol recombining(double T1, double plateau, double B0_grad,
                              double B0 = 0.0);

  [[nodiscard]] double plateau() const { return T3 - T2; }
};

struct InitialState {
  double Q0 = 0.0;  ///< initial position variance, m^2

  static InitialState from_width(double sqrt_Q0) { return {sqrt_Q0 * sqrt_Q0}; }
};

struct ExperimentConfig {
  ConstantsSet constants;
  SphereParams sphere;
  SpinWeights weights;
  Protocol protocol;
  InitialState initial;
  bool nuclear_correction = false;
};

struct Violation {
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::string to_string() const;
};

/// Absolute tolerance on protocol times.
inline constexpr double kTimeTolerance = 1e-12;
/// Tolerance on |beta_+|^2 + |beta_-|^2 = 1.
inline constexpr double kWeightTolerance = 1e-12;

ValidationReport validate(const ExperimentConfig& config);

/// Throws ValidationError listing every violated invariant.
void require_valid(const ExperimentConfig& config);

/// sqrt(G m / R^3).
double omega_s(const SphereParams& sphere, const ConstantsSet& constants);

/// Time at which constant-force branches reach a separation of 2R:
/// sqrt(4 m R / (g mu_B B0')).
double separation_time(const ExperimentConfig& config);

/// Trap frequency for which Q0 is the ground-state variance: hbar/(m Q0).
double omega_trap(const InitialState& initial, const SphereParams& sphere,
                  const ConstantsSet& constants);

/// Diamond microsphere with a 1 micron radius, B0' = 1e6 T/m, T1 = 0.25 s,
/// a 1 s plateau, |beta_+|^2 = 1/3 and sqrt(Q0) = 1 nm.
ExperimentConfig baseline_config(const ConstantsSet& constants = paper_constants());

/// Baseline sphere and field with every interval shortened tenfold
/// (T1 = 0.025 s, T5 = 0.2 s), so that the branches just clear 2R.
ExperimentConfig short_protocol_config(const ConstantsSet& constants = paper_constants());

/// Mass density implied by a sphere, m / (4/3 pi R^3).
double density(const SphereParams& sphere);

/// Sphere of the given radius at fixed density.
SphereParams sphere_at_density(double radius, double rho);

}  // namespace selfgrav
