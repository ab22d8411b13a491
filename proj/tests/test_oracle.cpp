#include "doctest.h"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "selfgrav/errors.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/oracle.hpp"
#include "selfgrav/phase.hpp"
#include "selfgrav/trajectories.hpp"

using namespace selfgrav;

namespace {

constexpr double ell = 1e-7;

// Wide enough for the scaled run's tenfold spreading but cheap.
GridSpec small_grid(double half_extent, std::size_t n, double steps_per_second) {
  GridSpec g;
  g.n = n;
  g.z_min = -half_extent;
  g.z_max = half_extent;
  g.steps_per_second = steps_per_second;
  return g;
}

ExperimentConfig free_config() {
  auto c = oracle_scaled_config();
  c.constants.G = 0.0;
  return c;
}

}  // namespace

TEST_CASE("initial packet moments") {
  const auto c = oracle_scaled_config();
  const auto s = initial_grid(c, small_grid(16.0 * ell, 512, 1.0));
  const double hbar = c.constants.hbar, Q0 = c.initial.Q0;
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    const auto m = extract_moments(s, b, hbar);
    CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m.mean_z) < 1e-12 * ell);
    CHECK(std::abs(m.mean_p) < 1e-12 * hbar / ell);
    CHECK(m.Q == doctest::Approx(Q0).epsilon(1e-10));
    CHECK(m.P == doctest::Approx(hbar * hbar / (4.0 * Q0)).epsilon(1e-10));
    CHECK(m.Q * m.P >= 0.25 * hbar * hbar * (1.0 - 1e-6));
  }
}

TEST_CASE("translated and boosted packets") {
  const auto c = oracle_scaled_config();
  const double hbar = c.constants.hbar;
  auto s = initial_grid(c, small_grid(16.0 * ell, 512, 1.0));
  const std::size_t shift = 40;
  const double a = double(shift) * s.dz;
  std::vector<std::complex<double>> moved(s.size(), 0.0);
  for (std::size_t k = 0; k + shift < s.size(); ++k) moved[k + shift] = s.psi_plus[k];
  s.psi_plus = moved;
  const auto m0 = extract_moments(s, Branch::Minus, hbar);
  const auto m1 = extract_moments(s, Branch::Plus, hbar);
  CHECK(m1.mean_z == doctest::Approx(a).epsilon(1e-10));
  CHECK(m1.Q == doctest::Approx(m0.Q).epsilon(1e-10));

  const double k = 2.0 * std::numbers::pi * 12.0 / (double(s.size()) * s.dz);
  for (std::size_t j = 0; j < s.size(); ++j)
    s.psi_minus[j] *= std::exp(std::complex<double>(0.0, k * s.z(j)));
  const auto mb = extract_moments(s, Branch::Minus, hbar);
  CHECK(mb.mean_p == doctest::Approx(hbar * k).epsilon(1e-10));
  CHECK(mb.P == doctest::Approx(m0.P).epsilon(1e-8));
}

TEST_CASE("centre phase of a chirped packet") {
  const auto c = oracle_scaled_config();
  auto s = initial_grid(c, small_grid(16.0 * ell, 512, 1.0));
  const double z0 = 0.3 * ell, c0 = 2.9, c1 = 0.4 / ell, c2 = 3.0 / (ell * ell);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double x = s.z(j) - z0;
    s.psi_plus[j] *= std::exp(std::complex<double>(0.0, c0 + c1 * x + c2 * x * x));
  }
  const auto cp = centre_phase(s, Branch::Plus, z0, c.initial.Q0);
  CHECK(cp.at_mean == doctest::Approx(c0).epsilon(1e-10));
  CHECK(cp.slope == doctest::Approx(c1).epsilon(1e-9));
  CHECK(cp.curvature == doctest::Approx(c2).epsilon(1e-9));
}

TEST_CASE("unwrapping and ambiguity count") {
  std::vector<TrackSample> h(5);
  const double raw[] = {3.0, -3.0, 3.1, -3.1, 2.9};
  for (int i = 0; i < 5; ++i) h[i].plus.phase = raw[i];
  const auto tr = unwrap_history(h);
  // 3.0 -> -3.0 is a +0.283 step, then back: continuous path
  CHECK(tr.plus[1] == doctest::Approx(-3.0 + 2.0 * std::numbers::pi));
  CHECK(tr.plus[2] == doctest::Approx(3.1));
  CHECK(tr.plus[3] == doctest::Approx(-3.1 + 2.0 * std::numbers::pi));
  CHECK(tr.plus[4] == doctest::Approx(2.9));
  CHECK(tr.ambiguous_steps == 0);

  h[2].plus.phase = 3.0 + 2.0;  // a jump of 2 rad in the difference
  CHECK(unwrap_history(h).ambiguous_steps >= 1);
  CHECK_THROWS_AS(extract_phase({}, Branch::Plus), ValidationError);
}

TEST_CASE("free spreading on the grid") {
  auto c = free_config();
  OracleOptions opt;
  opt.external_field = false;
  const auto run = evolve_grid(c, small_grid(80.0 * ell, 1280, 200.0), c.protocol.T5, opt);
  const double Q_end = free_spread_Q(c.protocol.T5, c);
  CHECK(std::sqrt(Q_end) == doctest::Approx(10.0 * ell).epsilon(0.01));
  for (const auto& s : run.history) {
    CHECK(oracle::rel(s.plus.Q, free_spread_Q(s.t, c)) < 1e-6);
    CHECK(oracle::rel(s.minus.Q, free_spread_Q(s.t, c)) < 1e-6);
  }
  CHECK(run.max_norm_drift < 1e-9);
  CHECK(run.delta_phi == 0.0);
}

TEST_CASE("forced-overlap harmonic run follows the spread law") {
  auto c = oracle_scaled_config();
  OracleOptions opt;
  opt.external_field = false;
  opt.force_overlap = true;
  const auto run = evolve_grid(c, small_grid(80.0 * ell, 1280, 2000.0), c.protocol.T5, opt);
  for (std::size_t i = 0; i < run.history.size(); i += 50) {
    const auto& s = run.history[i];
    CHECK(oracle::rel(s.plus.Q, spread_Q(s.t, 1.0, c)) < 1e-4);
  }
  CHECK(run.max_norm_drift < 1e-9);
}

TEST_CASE("split-step error halves twice per halving of dt") {
  // stiffer trap so the step error sits well above the spatial floor
  auto c = oracle_scaled_config();
  c.constants.G *= 100.0;
  OracleOptions opt;
  opt.external_field = false;
  opt.force_overlap = true;
  const double exact = spread_Q(c.protocol.T5, 1.0, c);
  std::vector<double> err;
  for (double sps : {50.0, 100.0, 200.0, 400.0}) {
    const auto run = evolve_grid(c, small_grid(80.0 * ell, 1280, sps), c.protocol.T5, opt);
    err.push_back(std::abs(run.history.back().plus.Q / exact - 1.0));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    CHECK(ratio > 3.0);
    CHECK(ratio < 6.0);
  }
  // overall slope over three halvings
  CHECK(std::log2(err.front() / err.back()) / 3.0 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("constant offset on one branch") {
  auto c = free_config();
  const double hbar = c.constants.hbar;
  const double tau = 0.4;
  const double V0 = 1.3 * hbar / tau;
  OracleOptions opt;
  opt.external_field = false;
  opt.offsets = {{Branch::Plus, V0, 0.2, 0.2 + tau}};
  const auto run = evolve_grid(c, small_grid(80.0 * ell, 1280, 200.0), c.protocol.T5, opt);
  CHECK(run.delta_phi == doctest::Approx(-V0 * tau / hbar).epsilon(1e-9));
  CHECK(run.ambiguous_steps == 0);
}

TEST_CASE("symmetric runs with the field on") {
  auto c = free_config();
  const auto grid = small_grid(96.0 * ell, 2048, 4000.0);
  const auto run = evolve_grid(c, grid, c.protocol.T5);
  CHECK(std::abs(run.delta_phi) < 1e-4);
  CHECK(run.max_norm_drift < 1e-9);

  // Ehrenfest means on the grid
  const double zs = mean_state(Branch::Plus, c.protocol.T2, c).mean_z;
  for (std::size_t i = 0; i < run.history.size(); i += 25) {
    const auto& s = run.history[i];
    CHECK(std::abs(s.plus.mean_z - mean_state(Branch::Plus, s.t, c).mean_z) < 1e-4 * zs);
    CHECK(std::abs(s.minus.mean_z - mean_state(Branch::Minus, s.t, c).mean_z) < 1e-4 * zs);
  }
  const double ps = c.sphere.mass * zs / c.protocol.T1;
  for (const auto& m : run.momenta)
    CHECK(std::abs(m.mean_p_plus - mean_state(Branch::Plus, m.t, c).mean_p) < 1e-4 * ps);
}

TEST_CASE("with all weight on one branch it only feels its own harmonic term") {
  auto c = oracle_scaled_config();
  c.weights = {1.0, 0.0};
  const auto run = evolve_grid(c, small_grid(96.0 * ell, 2048, 4000.0), c.protocol.T5);
  const BranchWidth plus(c, Branch::Plus);
  for (std::size_t i = 0; i < run.history.size(); i += 40) {
    const auto& s = run.history[i];
    CHECK(oracle::rel(s.plus.Q, spread_Q(s.t, 1.0, c)) < 1e-4);
    CHECK(oracle::rel(s.plus.Q, plus.Q(s.t)) < 1e-4);
  }
}

TEST_CASE("serial and parallel kernels give the same run") {
  auto c = oracle_scaled_config();
  auto g = small_grid(96.0 * ell, 2048, 500.0);
  OracleOptions opt;
  const auto a = evolve_grid(c, g, 0.3, opt);
  g.parallel = false;
  const auto b = evolve_grid(c, g, 0.3, opt);
  CHECK(a.delta_phi == doctest::Approx(b.delta_phi).epsilon(1e-12));
  CHECK(a.history.back().plus.Q == doctest::Approx(b.history.back().plus.Q).epsilon(1e-12));
}

TEST_CASE("escape and resolution diagnostics") {
  auto c = free_config();
  OracleOptions opt;
  opt.external_field = false;
  opt.escape_tolerance = 0.0;  // any tail in the edge cells counts
  CHECK_THROWS_AS(evolve_grid(c, small_grid(80.0 * ell, 1280, 200.0), c.protocol.T5, opt),
                  NumericalError);

  opt.escape_tolerance = 1e-10;
  CHECK_THROWS_AS(evolve_grid(c, small_grid(80.0 * ell, 256, 200.0), c.protocol.T5, opt),
                  ValidationError);  // dz too coarse
  CHECK_THROWS_AS(evolve_grid(c, small_grid(20.0 * ell, 512, 200.0), c.protocol.T5, opt),
                  ValidationError);  // extent too small for the spread
  CHECK_THROWS_AS(evolve_grid(c, small_grid(80.0 * ell, 1280, 200.0), 2.0 * c.protocol.T5, opt),
                  ValidationError);
}

TEST_CASE("convolution potential of a narrow packet") {
  auto c = oracle_scaled_config();
  c.weights = {1.0, 0.0};
  c.sphere.radius = 1000.0 * ell;
  const auto s = initial_grid(c, small_grid(16.0 * ell, 512, 1.0));
  const auto V = convolution_potential(s, c);
  const double m = c.sphere.mass, R = c.sphere.radius;
  const double gm2 = c.constants.G * m * m;
  const double mw2 = gm2 / (R * R * R);
  const std::size_t mid = s.size() / 2;  // z = dz/2
  const double z = s.z(mid);
  const double expected = -1.2 * gm2 / R + 0.5 * mw2 * (z * z + c.initial.Q0);
  CHECK(V[mid] == doctest::Approx(expected).epsilon(1e-6));
  const std::size_t j = 40;
  const double h = double(j) * s.dz;
  const double curv = (V[mid + j] - 2.0 * V[mid] + V[mid - j]) / (h * h);
  CHECK(curv == doctest::Approx(mw2).epsilon(2e-3));
}

TEST_CASE("snapshots") {
  auto c = free_config();
  OracleOptions opt;
  opt.external_field = false;
  opt.snapshot_times = {0.0, 0.5, c.protocol.T5};
  const auto run = evolve_grid(c, small_grid(80.0 * ell, 1280, 200.0), c.protocol.T5, opt);
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshots[1].t == doctest::Approx(0.5));
  std::ostringstream os;
  write_snapshot_csv(os, run.snapshots[1]);
  const std::string text = os.str();
  CHECK(text.rfind("# t_s=", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1282);
}
