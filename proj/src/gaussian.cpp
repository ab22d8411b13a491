#include "selfgrav/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "selfgrav/errors.hpp"
#include "selfgrav/trajectories.hpp"

namespace selfgrav {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// (x - sin x cos x) / (2x), series near zero.
double g_over_2x(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 0.1)
    return x2 * (1.0 / 3.0 -
                 x2 * (1.0 / 15.0 - x2 * (2.0 / 315.0 - x2 * (1.0 / 2835.0 - x2 * 2.0 / 155925.0))));
  return (x - std::sin(x) * std::cos(x)) / (2.0 * x);
}

struct Oscillator {
  double alpha, beta;  // hbar Re A / m, hbar Im A / m
  double Omega;

  Oscillator(complex A, double Omega_, double hbar, double m)
      : alpha(hbar * A.real() / m), beta(hbar * A.imag() / m), Omega(Omega_) {}

  // u(tau) = cos(Omega tau) + i (hbar A/m) sin(Omega tau)/Omega
  [[nodiscard]] complex u(double tau) const {
    const double th = Omega * tau;
    const double S = tau * sinc(th);
    return {std::cos(th) - beta * S, alpha * S};
  }
  [[nodiscard]] complex du(double tau) const {
    const double th = Omega * tau;
    const double S = tau * sinc(th);
    const double c = std::cos(th);
    return {-Omega * Omega * S - beta * c, alpha * c};
  }
  // Continuous arg u, which increases monotonically from 0.
  [[nodiscard]] double arg_u(double tau) const {
    double turns = 0.0;
    if (Omega > 0.0) {
      turns = std::floor(Omega * tau / std::numbers::pi);
      tau -= turns * std::numbers::pi / Omega;
      tau = std::max(tau, 0.0);
    }
    const complex v = u(tau);
    return turns * std::numbers::pi + std::atan2(v.imag(), v.real());
  }
};

}  // namespace

double GaussianBranch::norm() const {
  const double a = A.real();
  return std::exp(2.0 * C.real() + B.real() * B.real() / a) * std::sqrt(std::numbers::pi / a);
}

GaussianBranch ground_state(const ExperimentConfig& config, Branch branch) {
  GaussianBranch g;
  const double a = 0.5 / config.initial.Q0;
  g.A = {a, 0.0};
  g.B = {0.0, 0.0};
  g.C = {0.25 * std::log(a / std::numbers::pi), 0.0};
  g.t = 0.0;
  g.branch = branch;
  return g;
}

complex propagate_A(complex A_start, double Omega, double tau, double hbar, double m) {
  const Oscillator osc(A_start, Omega, hbar, m);
  return complex(0.0, -m / hbar) * osc.du(tau) / osc.u(tau);
}

double width_factor(complex A_start, double Omega, double tau, double hbar, double m) {
  return std::norm(Oscillator(A_start, Omega, hbar, m).u(tau));
}

complex a_analytic(double t, double nu, const ExperimentConfig& config) {
  const double w = omega_s(config.sphere, config.constants);
  return propagate_A({0.5 / config.initial.Q0, 0.0}, nu * w, t, config.constants.hbar,
                     config.sphere.mass);
}

double spread_Q(double t, double nu, const ExperimentConfig& config) {
  const double hbar = config.constants.hbar;
  const double m = config.sphere.mass;
  const double Q0 = config.initial.Q0;
  const double th = nu * omega_s(config.sphere, config.constants) * t;
  const double c = std::cos(th);
  // sin(th)/(nu w) written as t sinc(th) so that w -> 0 is regular.
  const double s = t * sinc(th);
  return Q0 * c * c + hbar * hbar * s * s / (4.0 * m * m * Q0);
}

double spread_P(double t, double nu, const ExperimentConfig& config) {
  const complex A = a_analytic(t, nu, config);
  const double hbar = config.constants.hbar;
  return 0.5 * hbar * hbar * std::norm(A) / A.real();
}

double free_spread_Q(double t, const ExperimentConfig& config) {
  const double hbar = config.constants.hbar;
  const double m = config.sphere.mass;
  const double Q0 = config.initial.Q0;
  return Q0 * (1.0 + hbar * hbar * t * t / (4.0 * m * m * Q0 * Q0));
}

WidthDifference width_difference(double t, const ExperimentConfig& config) {
  const double wt = omega_s(config.sphere, config.constants) * t;
  WidthDifference d;
  d.formula = 0.5 * std::sqrt(config.initial.Q0) *
              (1.0 - 2.0 * config.weights.beta_minus_sq) * wt * wt;
  d.exact = std::sqrt(spread_Q(t, std::sqrt(config.weights.beta_minus_sq), config)) -
            std::sqrt(spread_Q(t, std::sqrt(config.weights.beta_plus_sq), config));
  return d;
}

BranchWidth::BranchWidth(const ExperimentConfig& config, Branch branch)
    : branch_(branch), hbar_(config.constants.hbar), mass_(config.sphere.mass) {
  const double w = omega_s(config.sphere, config.constants);
  const double w_boost = w * kNuclearBoost;
  const double threshold = kNucleonScale * kNucleonScale;
  const double nu_sep = std::sqrt(branch == Branch::Plus ? config.weights.beta_plus_sq
                                                         : config.weights.beta_minus_sq);

  complex A{0.5 / config.initial.Q0, 0.0};
  for (const auto& regime : regime_intervals(config)) {
    const double nu = regime.separated ? nu_sep : 1.0;
    double t0 = regime.t0;
    int forced = -1;  // mode after a threshold crossing, immune to rounding
    while (t0 < regime.t1) {
      WidthPiece piece{t0, regime.t1, nu, w, A};
      if (config.nuclear_correction) {
        const bool below = forced >= 0 ? forced == 1 : 0.5 / A.real() < threshold;
        forced = -1;
        piece.omega = below ? w_boost : w;
        // First time the width crosses the nucleon scale on this stretch.
        const double Qs = 0.5 / A.real();
        auto excess = [&](double tau) {
          return Qs * width_factor(A, piece.Omega(), tau, hbar_, mass_) - threshold;
        };
        const double len = regime.t1 - t0;
        constexpr int kProbe = 400;
        double prev = 0.0;
        for (int k = 0; k <= kProbe; ++k) {
          const double tau = len * std::pow(1e-12, 1.0 - double(k) / kProbe);
          const double f = excess(tau);
          if ((f >= 0.0) == below) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t iters = 64;
            const auto [lo, hi] =
                boost::math::tools::toms748_solve(excess, prev, tau, tol, iters);
            piece.t1 = t0 + 0.5 * (lo + hi);
            forced = below ? 0 : 1;
            break;
          }
          prev = tau;
        }
      }
      pieces_.push_back(piece);
      A = propagate_A(piece.A_start, piece.Omega(), piece.t1 - piece.t0, hbar_, mass_);
      t0 = piece.t1;
    }
  }

  double s1 = 0.0, s2 = 0.0;
  for (const auto& p : pieces_) {
    i1_before_.push_back(s1);
    i2_before_.push_back(s2);
    s1 += i1_piece(p, p.t1 - p.t0);
    s2 += i2_piece(p, p.t1 - p.t0);
  }
}

const WidthPiece& BranchWidth::piece_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const WidthPiece& p) { return v < p.t1; });
  if (it == pieces_.end()) return pieces_.back();
  return *it;
}

complex BranchWidth::A(double t) const {
  const auto& p = piece_at(t);
  return propagate_A(p.A_start, p.Omega(), t - p.t0, hbar_, mass_);
}

double BranchWidth::Q(double t) const {
  const auto& p = piece_at(t);
  return 0.5 / p.A_start.real() * width_factor(p.A_start, p.Omega(), t - p.t0, hbar_, mass_);
}

double BranchWidth::P(double t) const {
  const complex a = A(t);
  return 0.5 * hbar_ * hbar_ * std::norm(a) / a.real();
}

double BranchWidth::i1_piece(const WidthPiece& p, double tau) const {
  return 0.5 * Oscillator(p.A_start, p.Omega(), hbar_, mass_).arg_u(tau);
}

double BranchWidth::i2_piece(const WidthPiece& p, double tau) const {
  const Oscillator osc(p.A_start, p.Omega(), hbar_, mass_);
  const double W = p.Omega();
  const double th = W * tau;
  const double Qs = 0.5 / p.A_start.real();
  const double s = std::sin(th);
  const double cos_term = 0.5 * W * W * tau * (1.0 + sinc(th) * std::cos(th));
  const double cross = osc.beta * s * s;
  const double sin_term = (osc.alpha * osc.alpha + osc.beta * osc.beta) * tau * g_over_2x(th);
  return mass_ * Qs / (2.0 * hbar_) * (cos_term - cross + sin_term);
}

double BranchWidth::i1(double t) const {
  const auto& p = piece_at(t);
  const auto k = std::size_t(&p - pieces_.data());
  return i1_before_[k] + i1_piece(p, t - p.t0);
}

double BranchWidth::i2(double t) const {
  const auto& p = piece_at(t);
  const auto k = std::size_t(&p - pieces_.data());
  return i2_before_[k] + i2_piece(p, t - p.t0);
}

SpreadCurve spread_curve(const ExperimentConfig& config, std::size_t samples) {
  if (samples < 2) throw ValidationError("spread curve needs at least two samples");
  const BranchWidth plus(config, Branch::Plus);
  const BranchWidth minus(config, Branch::Minus);
  SpreadCurve c;
  const double T5 = config.protocol.T5;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = T5 * double(k) / double(samples - 1);
    c.t.push_back(t);
    c.Q_plus.push_back(plus.Q(t));
    c.Q_minus.push_back(minus.Q(t));
    c.Q_free.push_back(free_spread_Q(t, config));
  }
  return c;
}

}  // namespace selfgrav
