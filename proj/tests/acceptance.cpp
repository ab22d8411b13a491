// One line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfgrav/abc_ode.hpp"
#include "selfgrav/config.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/oracle.hpp"
#include "selfgrav/phase.hpp"
#include "selfgrav/potential.hpp"
#include "selfgrav/trajectories.hpp"

using namespace selfgrav;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool within(double x, double target, double rel) {
  return std::abs(x - target) <= rel * std::abs(target);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

int failures = 0;

void criterion(int id, const char* title, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail << "threw: " << e.what();
  }
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.str().c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  criterion(1, "baseline phase shift", [](std::ostringstream& d) {
    const auto t0 = Clock::now();
    const auto c = baseline_config();
    const double dphi = delta_phi(c.protocol.T5, c);
    const double naive = naive_estimate(c);
    const double wall = seconds_since(t0);
    const auto cd = baseline_config(codata_constants());
    const double ratio_cd = std::abs(delta_phi(cd.protocol.T5, cd) / naive_estimate(cd));
    d << "delta_phi=" << dphi << " naive=" << naive << " codata ratio=" << ratio_cd
      << " time=" << wall << " s";
    return within(dphi, -15.33, 0.03) && within(naive, -15.59, 0.02) && wall < 1.0 &&
           ratio_cd >= 0.95 && ratio_cd <= 1.01;
  });

  criterion(2, "separation time", [](std::ostringstream& d) {
    const double ts = separation_time(baseline_config());
    d << "T_s=" << ts << " s";
    return within(ts, 0.034, 0.03);
  });

  criterion(3, "omega_s", [](std::ostringstream& d) {
    const auto c = baseline_config();
    const double w = omega_s(c.sphere, c.constants);
    d << "omega_s=" << w << " rad/s";
    return w >= 6.0e-4 && w <= 6.2e-4;
  });

  criterion(4, "symmetry null", [](std::ostringstream& d) {
    auto c = baseline_config();
    c.weights = {0.5, 0.5};
    const double dphi = delta_phi(c.protocol.T5, c);
    d << "delta_phi=" << dphi;
    return std::abs(dphi) < 1e-10;
  });

  criterion(5, "I2 at small spread", [](std::ostringstream& d) {
    auto c = baseline_config();
    c.initial = InitialState::from_width(1e-13);
    const double wt = omega_trap(c.initial, c.sphere, c.constants);
    const double est = i2_difference_estimate(c);
    // contribution of I2 to delta_phi is -(I2,+ - I2,-)
    const double full = -PhaseModel(c).breakdown(c.protocol.T5).diff.i2;
    d << "omega_trap=" << wt << " estimate=" << est << " full=" << full;
    return within(wt, 1.82e6, 0.01) && within(est, 0.0704, 0.01) && within(full, 0.07035, 0.01);
  });

  criterion(6, "short protocol", [](std::ostringstream& d) {
    const auto c = short_protocol_config();
    const double est = short_protocol_estimate(c);
    const double dplat = branch_distance(0.5 * (c.protocol.T2 + c.protocol.T3), c);
    const double ratio = dplat / (2.0 * c.sphere.radius);
    d << "estimate=" << est << " plateau d/2R=" << ratio
      << " full delta_phi=" << delta_phi(c.protocol.T5, c);
    return est >= -0.9 && est <= -0.5 && within(ratio, 1.0, 0.2);
  });

  criterion(7, "classical cancellation", [](std::ostringstream& d) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      auto c = baseline_config();
      c.protocol = Protocol::recombining(0.01 + 0.5 * u(rng), 2.0 * u(rng), 1e4 + 2e6 * u(rng),
                                         u(rng));
      c.weights = SpinWeights::from_plus(u(rng));
      require_valid(c);
      const double diff = (classical_action(Branch::Plus, c).total() -
                           classical_action(Branch::Minus, c).total()) /
                          c.constants.hbar;
      worst = std::max(worst, std::abs(diff));
    }
    d << "worst |dS/hbar|=" << worst << " over 20 protocols";
    return worst < 1e-10;
  });

  criterion(8, "trajectory invariance", [](std::ostringstream& d) {
    auto a = baseline_config();
    auto b = a;
    a.constants.G = 0.0;
    b.constants.G = 6.674e-11;
    int mismatches = 0;
    for (int k = 0; k <= 2000; ++k) {
      const double t = a.protocol.T5 * k / 2000.0;
      for (Branch br : {Branch::Plus, Branch::Minus}) {
        const auto sa = mean_state(br, t, a);
        const auto sb = mean_state(br, t, b);
        if (std::bit_cast<std::uint64_t>(sa.mean_z) != std::bit_cast<std::uint64_t>(sb.mean_z) ||
            std::bit_cast<std::uint64_t>(sa.mean_p) != std::bit_cast<std::uint64_t>(sb.mean_p))
          ++mismatches;
      }
    }
    d << mismatches << " bitwise mismatches in 4002 samples";
    return mismatches == 0;
  });

  criterion(9, "analytic vs ODE", [](std::ostringstream& d) {
    const auto c = baseline_config();
    const PhaseModel model(c);
    std::vector<double> ts;
    for (int k = 1; k <= 200; ++k) ts.push_back(c.protocol.T5 * k / 200.0);
    const auto r = integrate_pair(c, ts);
    double worst_a = 0.0, worst_phase = 0.0;
    for (const auto& s : r.samples) {
      for (Branch b : {Branch::Plus, Branch::Minus}) {
        const complex ode = b == Branch::Plus ? s.A_plus : s.A_minus;
        const complex closed = model.width(b).A(s.t);
        worst_a = std::max(worst_a, std::abs(ode - closed) / std::abs(closed));
      }
      worst_phase = std::max(worst_phase, std::abs(s.delta_phi - model.delta_phi(s.t)));
    }
    // before the first switch nu = 1 and a_analytic is the closed form itself
    const double ts0 = separation_crossings(c).front();
    const auto early = integrate_pair(c, {0.5 * ts0});
    const double a_direct = std::abs(early.samples[0].A_plus - a_analytic(0.5 * ts0, 1.0, c)) /
                            std::abs(a_analytic(0.5 * ts0, 1.0, c));
    d << "worst A rel=" << std::max(worst_a, a_direct) << " worst phase diff=" << worst_phase
      << " rad (" << r.steps << " steps)";
    return worst_a < 1e-8 && a_direct < 1e-8 && worst_phase < 1e-5;
  });

  criterion(10, "grid oracle cross-check", [](std::ostringstream& d) {
    const auto t0 = Clock::now();
    const auto c = oracle_scaled_config();
    const auto grid = oracle_scaled_grid();
    const auto run = evolve_grid(c, grid, c.protocol.T5);
    const PhaseModel model(c);
    const double closed = model.delta_phi(c.protocol.T5);
    double worst_q = 0.0;
    for (const auto& h : run.history) {
      worst_q = std::max({worst_q, rel_err(h.plus.Q, model.width(Branch::Plus).Q(h.t)),
                          rel_err(h.minus.Q, model.width(Branch::Minus).Q(h.t))});
    }
    const double wall = seconds_since(t0);
    const double ws_T5 = omega_s(c.sphere, c.constants) * c.protocol.T5;
    d << "N=" << grid.n << " omega_s T5=" << ws_T5 << " grid=" << run.delta_phi
      << " closed=" << closed << " rel=" << rel_err(run.delta_phi, closed)
      << " worst Q rel=" << worst_q << " time=" << wall << " s";
    return grid.n == 4096 && within(ws_T5, 0.3, 0.01) && rel_err(run.delta_phi, closed) < 0.01 &&
           worst_q < 1e-4 && wall < 120.0;
  });

  criterion(11, "potential regularity", [](std::ostringstream& d) {
    const auto c = baseline_config();
    const auto& s = c.sphere;
    const auto& k = c.constants;
    const double R = s.radius;
    const double scale = k.G * s.mass * s.mass / R;
    const double below = v_eff(std::nextafter(2.0 * R, 0.0), s, k);
    const double above = v_eff(std::nextafter(2.0 * R, 1.0), s, k);
    const double dv = std::abs(below - above) / std::abs(above);
    const double sb = v_eff_slope(std::nextafter(2.0 * R, 0.0), s, k);
    const double sa = v_eff_slope(std::nextafter(2.0 * R, 1.0), s, k);
    const double ds = std::abs(sb - sa) / std::abs(sa);
    double worst_trunc = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double x = 2.0 * i / 200.0;
      const double err = quadratic_v_eff(x * R, s, k) - v_eff(x * R, s, k);
      const double formula = scale * (3.0 / 16.0 * x * x * x - std::pow(x, 5) / 160.0);
      worst_trunc = std::max(worst_trunc, std::abs(err - formula) / scale);
    }
    d << "value jump=" << dv << " slope jump=" << ds << " truncation residual=" << worst_trunc;
    return dv < 1e-12 && ds < 1e-12 && worst_trunc < 1e-14;
  });

  criterion(12, "free-spreading limit", [](std::ostringstream& d) {
    auto c = oracle_scaled_config();
    c.constants.G = 0.0;
    GridSpec g;
    g.n = 1280;
    g.z_min = -80e-7;
    g.z_max = 80e-7;
    g.steps_per_second = 200.0;
    OracleOptions opt;
    opt.external_field = false;
    const auto run = evolve_grid(c, g, c.protocol.T5, opt);
    const double hbar = c.constants.hbar, m = c.sphere.mass, Q0 = c.initial.Q0;
    double worst_grid = 0.0, worst_closed = 0.0;
    for (const auto& h : run.history) {
      const double law = Q0 * (1.0 + hbar * hbar * h.t * h.t / (4.0 * m * m * Q0 * Q0));
      worst_grid = std::max({worst_grid, rel_err(h.plus.Q, law), rel_err(h.minus.Q, law)});
      worst_closed = std::max(worst_closed, rel_err(spread_Q(h.t, 1.0, c), law));
    }
    // the closed form at the physical baseline with G = 0
    auto b = baseline_config();
    b.constants.G = 0.0;
    const BranchWidth bw(b, Branch::Plus);
    for (int k = 0; k <= 200; ++k) {
      const double t = b.protocol.T5 * k / 200.0;
      worst_closed = std::max(worst_closed, rel_err(bw.Q(t), free_spread_Q(t, b)));
    }
    d << "grid worst rel=" << worst_grid << " closed-form worst rel=" << worst_closed;
    return worst_grid < 1e-6 && worst_closed < 1e-6;
  });

  criterion(13, "radius sweep scaling", [](std::ostringstream& d) {
    const auto c = baseline_config();
    std::vector<double> radii;
    for (int i = 0; i <= 12; ++i) radii.push_back(0.5e-6 * std::pow(4.0, i / 12.0));
    const auto pts = radius_sweep(c, radii);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool monotone = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].ok()) throw std::runtime_error(pts[i].error);
      if (i > 0 && std::abs(pts[i].delta_phi) <= std::abs(pts[i - 1].delta_phi)) monotone = false;
      const double x = std::log(pts[i].radius), y = std::log(std::abs(pts[i].delta_phi));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = double(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    d << "log-log slope=" << slope << (monotone ? " monotone" : " NOT monotone");
    return slope >= 4.75 && slope <= 5.25 && monotone;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
