#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/potential.hpp"

namespace selfgrav {

/// Uniform cell-centred grid z_k = z_min + (k + 1/2) dz, k < n, and the
/// time step: each protocol segment is cut into round(length * steps_per_second)
/// equal steps so that every T_i is hit exactly.
struct GridSpec {
  std::size_t n = 4096;
  double z_min = 0.0;
  double z_max = 0.0;
  double steps_per_second = 0.0;
  bool parallel = true;  ///< OpenMP kernels instead of the serial reference
  /// Momentum moments are recorded every this many steps.
  std::size_t momentum_stride = 16;

  [[nodiscard]] double dz() const { return (z_max - z_min) / double(n); }
};

struct GridState {
  double z_min = 0.0;
  double dz = 0.0;
  double t = 0.0;
  std::vector<std::complex<double>> psi_plus;
  std::vector<std::complex<double>> psi_minus;

  [[nodiscard]] std::size_t size() const { return psi_plus.size(); }
  [[nodiscard]] double z(std::size_t k) const { return z_min + (double(k) + 0.5) * dz; }
  [[nodiscard]] const std::vector<std::complex<double>>& psi(Branch b) const {
    return b == Branch::Plus ? psi_plus : psi_minus;
  }
  [[nodiscard]] std::vector<std::complex<double>>& psi(Branch b) {
    return b == Branch::Plus ? psi_plus : psi_minus;
  }
};

enum class SelfPotential {
  Moments,      ///< quadratic / Newton form rebuilt from the grid moments
  Convolution,  ///< |psi|^2 (Born-weighted over branches) convolved with v_eff
};

/// Constant potential V0 felt by one branch during [t0, t1].
struct PotentialOffset {
  Branch branch = Branch::Plus;
  double V0 = 0.0;  ///< J
  double t0 = 0.0, t1 = 0.0;
};

struct OracleOptions {
  SelfPotential self_potential = SelfPotential::Moments;
  bool force_overlap = false;   ///< nu = 1 throughout
  bool external_field = true;   ///< Stern-Gerlach potential on/off
  std::vector<PotentialOffset> offsets;
  double escape_tolerance = 1e-10;
  std::vector<double> snapshot_times;
};

struct GridMoments {
  double mean_z = 0.0;
  double mean_p = 0.0;
  double Q = 0.0;
  double P = 0.0;
  double norm = 0.0;
};

/// Moments of one branch; <p> and P from the spectral representation.
GridMoments extract_moments(const GridState& state, Branch branch, double hbar);

/// Weighted quadratic fit of arg psi within sqrt(Q) of <z>.
struct CentrePhase {
  double at_mean = 0.0;  ///< fitted phase at <z>, in (-pi, pi]
  double slope = 0.0;    ///< rad/m
  double curvature = 0.0;  ///< rad/m^2, coefficient of (z - <z>)^2
};

CentrePhase centre_phase(const GridState& state, Branch branch, double mean_z, double Q);

struct BranchTrack {
  double mean_z = 0.0;
  double Q = 0.0;
  double norm = 0.0;
  double phase = 0.0;  ///< raw centre phase, wrapped
};

struct TrackSample {
  double t = 0.0;
  BranchTrack plus;
  BranchTrack minus;
};

struct MomentumSample {
  double t = 0.0;
  double mean_p_plus = 0.0, mean_p_minus = 0.0;
  double P_plus = 0.0, P_minus = 0.0;
};

/// Continuous branch phase along the history and the number of steps where
/// the difference of the two raw phases jumped by more than pi/2.
struct PhaseTrack {
  std::vector<double> plus;
  std::vector<double> minus;
  int ambiguous_steps = 0;
};

PhaseTrack unwrap_history(const std::vector<TrackSample>& history);

/// Final unwrapped centre phase of one branch. At T5 the branches sit at
/// <z> = 0 and this is Im C.
double extract_phase(const std::vector<TrackSample>& history, Branch branch);

struct OracleRun {
  GridState final_state;
  std::vector<TrackSample> history;  ///< every step, starting at t = 0
  std::vector<MomentumSample> momenta;
  std::vector<GridState> snapshots;
  std::size_t steps = 0;
  double delta_phi = 0.0;  ///< extract_phase(plus) - extract_phase(minus)
  int ambiguous_steps = 0;
  double max_norm_drift = 0.0;
};

/// Ground-state packets of both branches on the grid.
GridState initial_grid(const ExperimentConfig& config, const GridSpec& grid);

/// Strang split-step evolution of both branches over [0, t_end]. Throws
/// ValidationError if the grid does not resolve the run, NumericalError if
/// probability reaches the edges of the grid or of its spectrum.
OracleRun evolve_grid(const ExperimentConfig& config, const GridSpec& grid, double t_end,
                      const OracleOptions& options = {});

/// Self-gravity potential of the Born-weighted mass density
/// |b+|^2 |psi+|^2 + |b-|^2 |psi-|^2, by FFT convolution with v_eff.
std::vector<double> convolution_potential(const GridState& state, const ExperimentConfig& config);

/// Desk-scale configuration for the oracle: packets of width l = 100 nm
/// that spread tenfold, sphere radius 8 l, branches parted by 40 l, and G
/// inflated so that omega_s T5 = 0.3.
ExperimentConfig oracle_scaled_config();
GridSpec oracle_scaled_grid();

/// z, Re/Im psi_+, Re/Im psi_- per line.
void write_snapshot_csv(std::ostream& out, const GridState& state);

}  // namespace selfgrav
