#pragma once

#include <string>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/trajectories.hpp"

namespace selfgrav {

/// Contributions to Im C of one branch, in rad. The quantum terms are the
/// integrals (1/hbar) int F_Q piece dt, so
/// Im C = boundary_zp + boundary_width + classical - (i1 + i2 + const_self + newton_cross).
struct BranchPhase {
  double boundary_zp = 0.0;     ///< -<z><p>/hbar
  double boundary_width = 0.0;  ///< -<z>^2 Im A / 2
  double classical = 0.0;       ///< S_cl / hbar
  double i1 = 0.0;              ///< int hbar/(4 m Q) dt
  double i2 = 0.0;              ///< int (m w^2/2 hbar) nu^2 Q dt
  double const_self = 0.0;      ///< -(1/hbar) int (6/5)(G m^2/R) nu^2 dt
  double newton_cross = 0.0;    ///< -(1/hbar) int (1 - nu^2) G m^2/d dt

  [[nodiscard]] double total() const {
    return boundary_zp + boundary_width + classical - (i1 + i2 + const_self + newton_cross);
  }
};

struct PhaseBreakdown {
  double t = 0.0;
  BranchPhase plus;
  BranchPhase minus;
  /// Term-wise plus - minus, each formed without cancelling the large
  /// branch-common parts.
  BranchPhase diff;
  double delta_phi = 0.0;  ///< diff.total()
};

/// Closed-form phase of both branches for one configuration.
class PhaseModel {
 public:
  /// Throws ValidationError on an invalid configuration.
  explicit PhaseModel(const ExperimentConfig& config);

  /// Instantaneous F_Q of a branch, J.
  [[nodiscard]] double f_quantum(Branch branch, double t) const;
  [[nodiscard]] BranchPhase imc(Branch branch, double t) const;
  [[nodiscard]] PhaseBreakdown breakdown(double t) const;
  [[nodiscard]] double delta_phi(double t) const { return breakdown(t).delta_phi; }

  [[nodiscard]] const BranchWidth& width(Branch branch) const {
    return branch == Branch::Plus ? plus_ : minus_;
  }
  [[nodiscard]] const ExperimentConfig& config() const { return config_; }

 private:
  [[nodiscard]] double nu_sq(Branch branch, bool separated) const;
  [[nodiscard]] double const_self_integral(Branch branch, double t) const;
  [[nodiscard]] double newton_integral(Branch branch, double t) const;
  [[nodiscard]] double const_self_difference(double t) const;
  [[nodiscard]] double newton_difference(double t) const;
  void check_time(double t) const;

  ExperimentConfig config_;
  std::vector<RegimeInterval> regimes_;
  BranchWidth plus_;
  BranchWidth minus_;
};

double f_quantum(Branch branch, double t, const ExperimentConfig& config);
BranchPhase imc(Branch branch, double t, const ExperimentConfig& config);
double delta_phi(double t, const ExperimentConfig& config);

/// (1/2) arctan(hbar tan(nu w t) / (2 m nu Q0 w)), continued across the
/// poles of tan, for a ground-state packet at fixed nu.
double i1_closed(double t, double nu, const ExperimentConfig& config);

/// (1/2)(m w^2/hbar) nu^2 [Q0 t/2 + hbar^2 t/(8 m^2 w^2 nu^2 Q0)
///   + (Q0/2 - hbar^2/(8 m^2 w^2 nu^2 Q0)) sin(2 nu w t)/(2 nu w)].
double i2_closed(double t, double nu, const ExperimentConfig& config);

/// (6/5)(G m^2/(hbar R))(T5 - 2 T_s)(|b+|^2 - |b-|^2).
double naive_estimate(const ExperimentConfig& config);

/// Adds the Newton pull of branches that barely clear 2R:
/// (6/5 - 1/2)(G m^2/(hbar R))(T5 - 2 T_s)(|b+|^2 - |b-|^2).
double short_protocol_estimate(const ExperimentConfig& config);

/// (1/24) w_trap w_s^2 (T5 - T_s)^3 (|b-|^2 - |b+|^2), the large-spreading
/// limit of -(I2,+ - I2,-) for a ground-state packet. Baseline weights turn
/// the prefactor into 1/72.
double i2_difference_estimate(const ExperimentConfig& config);

struct PhaseCurve {
  std::vector<double> t;
  std::vector<double> delta_phi;
  std::vector<double> i1_diff;
  std::vector<double> i2_diff;
  std::vector<double> const_self_diff;
  std::vector<double> newton_diff;
  std::vector<double> classical_diff;
  std::vector<double> boundary_diff;
};

inline constexpr std::size_t kDefaultCurveSamples = 2000;

PhaseCurve phase_curve(const PhaseModel& model, std::size_t samples = kDefaultCurveSamples);

struct SweepPoint {
  double radius = 0.0;
  double mass = 0.0;
  double delta_phi = 0.0;
  std::string error;  ///< empty on success

  [[nodiscard]] bool ok() const { return error.empty(); }
};

/// Delta phi(T5) for each radius at the density of `config.sphere`. Points
/// run in parallel on up to `jobs` threads (0: OpenMP default); a failing
/// point records its error and the sweep continues.
std::vector<SweepPoint> radius_sweep(const ExperimentConfig& config,
                                     const std::vector<double>& radii, int jobs = 0);

}  // namespace selfgrav
