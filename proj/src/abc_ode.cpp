#include "selfgrav/abc_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "selfgrav/errors.hpp"
#include "selfgrav/trajectories.hpp"

namespace selfgrav {

namespace odeint = boost::numeric::odeint;

namespace {

// Steps x from t to t_end, landing exactly on t_end. dt carries the step
// size suggestion between calls.
template <class State, class System>
std::size_t integrate_to(System sys, State& x, double t, double t_end, double& dt,
                         const AbcOptions& options) {
  auto stepper =
      odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
  std::size_t steps = 0;
  int rejections = 0;
  while (t < t_end) {
    const double remaining = t_end - t;
    // never leave a sliver that rounds below the step floor
    const bool clamped = dt >= remaining || remaining - dt < 1e-6 * remaining;
    double h = clamped ? remaining : dt;
    const double floor = 1e-15 * std::max(std::abs(t), std::abs(t_end));
    if (remaining <= floor) break;  // stops that differ only by rounding
    if (h <= floor) {
      std::ostringstream msg;
      msg << "step-size underflow at t=" << t << " (h=" << h << ")";
      throw NumericalError(msg.str());
    }
    if (stepper.try_step(sys, x, t, h) == odeint::success) {
      ++steps;
      rejections = 0;
      if (clamped) {
        t = t_end;
      } else {
        dt = h;
      }
    } else {
      dt = h;
      if (++rejections > options.max_rejections) {
        std::ostringstream msg;
        msg << "step rejected " << rejections << " times at t=" << t;
        throw NumericalError(msg.str());
      }
    }
  }
  return steps;
}

double regime_nu(const ExperimentConfig& config, Branch branch, double t) {
  for (const auto& r : regime_intervals(config)) {
    if (t >= r.t0 && t <= r.t1) {
      if (!r.separated) return 1.0;
      return std::sqrt(branch == Branch::Plus ? config.weights.beta_plus_sq
                                              : config.weights.beta_minus_sq);
    }
  }
  return 1.0;
}

double initial_step(const ExperimentConfig& config) {
  const double spread_time =
      config.sphere.mass * config.initial.Q0 / config.constants.hbar;
  return 1e-2 * std::min(config.protocol.T5, spread_time);
}

std::vector<double> stop_times(const ExperimentConfig& config, std::vector<double> extra) {
  auto t = breakpoints(config);
  for (double s : extra) {
    if (s < 0.0 || s > config.protocol.T5)
      throw ValidationError("sample time outside [0, T5]");
    t.push_back(s);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

AbcRates abc_rates(const GaussianBranch& s, const TaylorCoeffs& v, double hbar, double mass) {
  const complex minus_i{0.0, -1.0};
  const double k = hbar / mass;
  return {minus_i * (k * s.A * s.A - 2.0 * v.V2 / hbar),
          minus_i * (k * s.A * s.B + v.V1 / hbar),
          minus_i * (0.5 * k * (s.A - s.B * s.B) + v.V0 / hbar)};
}

GaussianBranch evolve_abc(const GaussianBranch& state, const CoeffFn& coeffs, double dt,
                          const ExperimentConfig& config, const AbcOptions& options) {
  if (!(dt > 0.0)) throw ValidationError("evolve_abc needs dt > 0");
  // Integrated in the centred form psi = exp(-A (z-q)^2/2 + i p (z-q)/hbar + g)
  // with real q = <z>, p = <p>. Re g then only moves with Im A, so the norm
  // survives displacements where Re C and (Re B)^2/Re A are both ~1e10.
  using State = std::array<double, 6>;
  const double hbar = config.constants.hbar;
  const double mass = config.sphere.mass;
  const double As = std::abs(state.A);
  double zs = std::max(std::abs(state.mean_z()), 1.0 / std::sqrt(As));
  for (const auto& s : motion_segments(config)) zs = std::max(zs, std::abs(s.z_vertex));
  const double ps = hbar * As * zs;

  auto to_abc = [&](complex A, double q, double p, complex g, double t) {
    GaussianBranch out;
    out.A = A;
    out.B = A * q + complex(0.0, p / hbar);
    out.C = g - 0.5 * A * q * q - complex(0.0, p * q / hbar);
    out.t = t;
    out.branch = state.branch;
    return out;
  };
  auto sys = [&](const State& x, State& dx, double t) {
    const complex A = complex(x[0], x[1]) * As;
    const double q = x[2] * zs;
    const double p = x[3] * ps;
    const GaussianBranch g = to_abc(A, q, p, complex(x[4], x[5]), t);
    const TaylorCoeffs v = coeffs(t, g);
    const complex minus_i{0.0, -1.0};
    const complex dA = minus_i * (hbar / mass * A * A - 2.0 * v.V2 / hbar);
    const double dq = p / mass;
    const double dp = -(v.V1 + 2.0 * v.V2 * q);
    const complex dg =
        minus_i * (0.5 * hbar / mass * A + (v(q) - 0.5 * p * p / mass) / hbar);
    dx = {dA.real() / As, dA.imag() / As, dq / zs, dp / ps, dg.real(), dg.imag()};
  };

  const double q0 = state.mean_z();
  const double p0 = state.mean_p(hbar);
  const complex g0 = state.C + 0.5 * state.A * q0 * q0 + complex(0.0, p0 * q0 / hbar);
  State x{state.A.real() / As, state.A.imag() / As, q0 / zs, p0 / ps, g0.real(), g0.imag()};
  double h = std::min(dt, initial_step(config));
  integrate_to(sys, x, state.t, state.t + dt, h, options);
  const GaussianBranch out =
      to_abc(complex(x[0], x[1]) * As, x[2] * zs, x[3] * ps, complex(x[4], x[5]), state.t + dt);
  if (!(out.A.real() > 0.0) || !std::isfinite(out.C.imag()))
    throw NumericalError("Gaussian branch lost normalizability during integration");
  return out;
}

CoeffFn branch_coefficients(const ExperimentConfig& config, Branch branch, double t_mid) {
  const double nu = regime_nu(config, branch, t_mid);
  const double lambda = lambda_of_t(t_mid, config.protocol);
  const TaylorCoeffs ext = external_taylor(branch, lambda, config.protocol, config.constants);
  return [config, branch, nu, ext](double t, const GaussianBranch& g) {
    const double other = mean_state(selfgrav::other(branch), t, config).mean_z;
    BranchContext ctx =
        make_branch_context(branch, g.mean_z(), other, g.Q(), config.weights, config.sphere);
    ctx.nu = nu;
    const double w = effective_omega_s(g.Q(), config.sphere, config.constants,
                                       config.nuclear_correction);
    return branch_taylor(ctx, other, config.sphere, config.constants, w) + ext;
  };
}

std::vector<double> breakpoints(const ExperimentConfig& config) {
  const auto& p = config.protocol;
  std::vector<double> t{0.0, p.T1, p.T2, p.T3, p.T4, p.T5};
  for (double c : separation_crossings(config)) t.push_back(c);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

PairResult integrate_pair(const ExperimentConfig& config,
                          const std::vector<double>& sample_times,
                          const AbcOptions& options) {
  using State = std::array<double, 12>;
  const double hbar = config.constants.hbar;
  const double mass = config.sphere.mass;
  const GaussianBranch g0 = ground_state(config, Branch::Plus);
  const double As = g0.A.real();
  const auto segs = motion_segments(config);
  double z_max = std::sqrt(config.initial.Q0);
  for (const auto& s : segs) z_max = std::max(z_max, std::abs(s.z_vertex));
  const double Bs = As * z_max;

  struct Region {
    double lambda;
    double nu_p, nu_m;
  } region{};

  auto unpack = [&](const State& x, complex& A, complex& B, complex& C, complex& dA,
                    complex& dB, complex& dC) {
    A = complex(x[0], x[1]) * As;
    B = complex(x[2], x[3]) * Bs;
    C = complex(x[4], x[5]);
    dA = complex(x[6], x[7]) * As;
    dB = complex(x[8], x[9]) * Bs;
    dC = complex(x[10], x[11]);
  };

  auto sys = [&](const State& x, State& dx, double) {
    complex A, B, C, dA, dB, dC;
    unpack(x, A, B, C, dA, dB, dC);
    const complex Am = A - dA;
    const complex Bm = B - dB;
    const double Qp = 0.5 / A.real();
    const double Qm = 0.5 / Am.real();
    const double zp = B.real() / A.real();
    const double zm = Bm.real() / Am.real();  // mirror frame
    const double d = std::abs(zp + zm);
    const double wp =
        effective_omega_s(Qp, config.sphere, config.constants, config.nuclear_correction);
    const double wm =
        effective_omega_s(Qm, config.sphere, config.constants, config.nuclear_correction);
    const TaylorCoeffs self_p = branch_taylor({Branch::Plus, region.nu_p, d, zp, Qp}, -zm,
                                              config.sphere, config.constants, wp);
    const TaylorCoeffs self_m = branch_taylor({Branch::Minus, region.nu_m, d, zm, Qm}, -zp,
                                              config.sphere, config.constants, wm);
    const TaylorCoeffs ext_p =
        external_taylor(Branch::Plus, region.lambda, config.protocol, config.constants);
    const TaylorCoeffs ext_m =
        external_taylor(Branch::Minus, region.lambda, config.protocol, config.constants);

    const TaylorCoeffs vp = self_p + ext_p;
    const complex minus_i{0.0, -1.0};
    const double k = hbar / mass;
    const complex rA = minus_i * (k * A * A - 2.0 * vp.V2 / hbar);
    const complex rB = minus_i * (k * A * B + vp.V1 / hbar);
    const complex rC = minus_i * (0.5 * k * (A - B * B) + vp.V0 / hbar);

    // Differences formed from the self-gravity parts; the external V1 is the
    // same in both frames and V0 differs only by sign.
    const double dV2 = self_p.V2 - self_m.V2;
    const double dV1 = self_p.V1 - self_m.V1;
    const double dV0 = (self_p.V0 - self_m.V0) + (ext_p.V0 - ext_m.V0);
    const complex rdA = minus_i * (k * dA * (2.0 * A - dA) - 2.0 * dV2 / hbar);
    const complex rdB = minus_i * (k * (dA * B + A * dB - dA * dB) + dV1 / hbar);
    const complex rdC = minus_i * (0.5 * k * (dA - dB * (2.0 * B - dB)) + dV0 / hbar);

    dx = {rA.real() / As,  rA.imag() / As,  rB.real() / Bs,  rB.imag() / Bs,
          rC.real(),       rC.imag(),       rdA.real() / As, rdA.imag() / As,
          rdB.real() / Bs, rdB.imag() / Bs, rdC.real(),      rdC.imag()};
  };

  State x{};
  x[0] = 1.0;
  x[4] = g0.C.real();

  PairResult result;
  auto record = [&](double t) {
    complex A, B, C, dA, dB, dC;
    unpack(x, A, B, C, dA, dB, dC);
    PairSample s;
    s.t = t;
    s.A_plus = A;
    s.A_minus = A - dA;
    s.mean_z_plus = B.real() / A.real();
    s.mean_p_plus = hbar * (B.imag() - A.imag() * B.real() / A.real());
    s.delta_phi = dC.imag();
    result.samples.push_back(s);
  };

  std::vector<double> wanted = sample_times;
  std::sort(wanted.begin(), wanted.end());
  const auto stops = stop_times(config, wanted);
  auto next_sample = wanted.begin();
  auto maybe_record = [&](double t) {
    while (next_sample != wanted.end() && *next_sample == t) {
      record(t);
      ++next_sample;
    }
  };

  double h = initial_step(config);
  maybe_record(stops.front());
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    const double a = stops[i];
    const double b = stops[i + 1];
    const double mid = 0.5 * (a + b);
    region.lambda = lambda_of_t(mid, config.protocol);
    region.nu_p = regime_nu(config, Branch::Plus, mid);
    region.nu_m = regime_nu(config, Branch::Minus, mid);
    result.steps += integrate_to(sys, x, a, b, h, options);
    if (!std::isfinite(x[11]) || !(x[0] > 0.0) || !(x[0] - x[6] > 0.0))
      throw NumericalError("pair integration diverged near t=" + std::to_string(b));
    maybe_record(b);
  }
  result.delta_phi = x[11];
  return result;
}

}  // namespace selfgrav
