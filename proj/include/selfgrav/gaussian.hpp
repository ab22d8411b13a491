#pragma once

#include <complex>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/potential.hpp"

namespace selfgrav {

using complex = std::complex<double>;

/// psi(z) = exp(-A z^2/2 + B z + C).
struct GaussianBranch {
  complex A{1.0, 0.0};  ///< m^-2
  complex B{0.0, 0.0};  ///< m^-1
  complex C{0.0, 0.0};
  double t = 0.0;
  Branch branch = Branch::Plus;

  [[nodiscard]] double Q() const { return 0.5 / A.real(); }
  [[nodiscard]] double P(double hbar) const {
    return 0.5 * hbar * hbar * std::norm(A) / A.real();
  }
  [[nodiscard]] double mean_z() const { return B.real() / A.real(); }
  [[nodiscard]] double mean_p(double hbar) const {
    return hbar * (B.imag() - A.imag() * B.real() / A.real());
  }
  /// Integral of |psi|^2 over the line.
  [[nodiscard]] double norm() const;
};

/// Minimum-uncertainty packet of variance Q0 at the origin, unit norm.
GaussianBranch ground_state(const ExperimentConfig& config, Branch branch);

/// A after a time tau in the harmonic potential (m Omega^2/2) z^2, starting
/// from A_start. Uses A = -i (m/hbar) u'/u with u'' = -Omega^2 u, which stays
/// exact as Omega -> 0 (free packet).
complex propagate_A(complex A_start, double Omega, double tau, double hbar, double m);

/// Q(tau)/Q(0) for the same evolution, |u(tau)|^2.
double width_factor(complex A_start, double Omega, double tau, double hbar, double m);

/// A(t) for a packet that starts in the ground state with variance Q0 and
/// evolves with a fixed nu: nu (m w/hbar)(1 + c0 e^{-2i nu w t})/(1 - c0 e^{-2i nu w t}).
complex a_analytic(double t, double nu, const ExperimentConfig& config);

/// Q0 cos^2(nu w t) + hbar^2 sin^2(nu w t) / (4 m^2 w^2 nu^2 Q0).
double spread_Q(double t, double nu, const ExperimentConfig& config);

/// hbar^2 |A|^2 / (2 Re A) for the same evolution.
double spread_P(double t, double nu, const ExperimentConfig& config);

/// Free-packet variance Q0 (1 + hbar^2 t^2 / (4 m^2 Q0^2)).
double free_spread_Q(double t, const ExperimentConfig& config);

struct WidthDifference {
  double formula = 0.0;  ///< (sqrt(Q0)/2)(1 - 2|beta_-|^2)(w t)^2
  double exact = 0.0;    ///< sqrt(Q_-) - sqrt(Q_+) from spread_Q with nu = |beta|
};

WidthDifference width_difference(double t, const ExperimentConfig& config);

/// Stretch of constant nu and omega in a branch's width evolution.
struct WidthPiece {
  double t0 = 0.0, t1 = 0.0;
  double nu = 1.0;
  double omega = 0.0;  ///< effective omega_s on this piece
  complex A_start;

  [[nodiscard]] double Omega() const { return nu * omega; }
};

/// Closed-form width evolution of one branch over the whole protocol,
/// including the switch of nu when the branches separate and recombine
/// (A continuous across each switch) and, if enabled, the nuclear boost of
/// omega_s while sqrt(Q) is below the nucleon scale.
class BranchWidth {
 public:
  BranchWidth(const ExperimentConfig& config, Branch branch);

  [[nodiscard]] complex A(double t) const;
  [[nodiscard]] double Q(double t) const;
  [[nodiscard]] double P(double t) const;
  [[nodiscard]] double nu(double t) const { return piece_at(t).nu; }
  [[nodiscard]] double omega(double t) const { return piece_at(t).omega; }

  /// int_0^t hbar / (4 m Q) dt'.
  [[nodiscard]] double i1(double t) const;
  /// int_0^t (m omega^2 nu^2 / 2 hbar) Q dt'.
  [[nodiscard]] double i2(double t) const;

  [[nodiscard]] const std::vector<WidthPiece>& pieces() const { return pieces_; }
  [[nodiscard]] Branch branch() const { return branch_; }

 private:
  [[nodiscard]] const WidthPiece& piece_at(double t) const;
  [[nodiscard]] double i1_piece(const WidthPiece& p, double tau) const;
  [[nodiscard]] double i2_piece(const WidthPiece& p, double tau) const;

  Branch branch_;
  double hbar_;
  double mass_;
  std::vector<WidthPiece> pieces_;
  std::vector<double> i1_before_;
  std::vector<double> i2_before_;
};

/// Sampled Q_+(t), Q_-(t) and the free-packet reference.
struct SpreadCurve {
  std::vector<double> t;
  std::vector<double> Q_plus;
  std::vector<double> Q_minus;
  std::vector<double> Q_free;
};

SpreadCurve spread_curve(const ExperimentConfig& config, std::size_t samples);

}  // namespace selfgrav
