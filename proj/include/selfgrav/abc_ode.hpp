#pragma once

#include <functional>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/potential.hpp"

namespace selfgrav {

struct AbcOptions {
  double rel_tol = 1e-10;
  /// Absolute floor on the scaled state; tiny so that control is relative.
  double abs_tol = 1e-30;
  int max_rejections = 500;
};

/// Potential coefficients as a function of time and the current state.
using CoeffFn = std::function<TaylorCoeffs(double t, const GaussianBranch&)>;

/// Right-hand side of i dA/dt = (hbar/m) A^2 - 2 V2/hbar,
/// i dB/dt = (hbar/m) A B + V1/hbar, i dC/dt = (hbar/2m)(A - B^2) + V0/hbar.
struct AbcRates {
  complex dA, dB, dC;
};
AbcRates abc_rates(const GaussianBranch& state, const TaylorCoeffs& v, double hbar,
                   double mass);

/// Adaptive Dormand-Prince integration of one branch from state.t to
/// state.t + dt. `coeffs` must be smooth on the interval; split the call at
/// discontinuities. Throws NumericalError on step-size underflow.
GaussianBranch evolve_abc(const GaussianBranch& state, const CoeffFn& coeffs, double dt,
                          const ExperimentConfig& config, const AbcOptions& options = {});

/// Full self-consistent potential for one branch (self-gravity from the
/// state's own moments, Newton pull of the other branch at its Ehrenfest
/// mean, Stern-Gerlach field) with nu fixed by the regime schedule at `t_mid`.
CoeffFn branch_coefficients(const ExperimentConfig& config, Branch branch, double t_mid);

/// Times at which the potential changes form: T1..T4 and the regime switches.
std::vector<double> breakpoints(const ExperimentConfig& config);

struct PairSample {
  double t = 0.0;
  complex A_plus, A_minus;
  double mean_z_plus = 0.0;
  double mean_p_plus = 0.0;
  double delta_phi = 0.0;  ///< Im C_+ - Im C_-
};

struct PairResult {
  std::vector<PairSample> samples;
  double delta_phi = 0.0;  ///< at T5
  std::size_t steps = 0;
};

/// Evolves both branches over [0,T5]. The - branch is carried in the mirror
/// frame z -> -z, where it differs from the + branch only through
/// self-gravity, and as differences (dA, dB, dC) from the + branch, so that
/// the phase difference does not drown in the ~1e12 rad common phase.
PairResult integrate_pair(const ExperimentConfig& config,
                          const std::vector<double>& sample_times,
                          const AbcOptions& options = {});

}  // namespace selfgrav
