#include "selfgrav/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fftw3.h>

#include "selfgrav/errors.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/oracle_kernels.hpp"
#include "selfgrav/trajectories.hpp"

namespace selfgrav {

namespace {

using cplx = std::complex<double>;

constexpr std::size_t kEdgeCells = 4;

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), scratch_(n) {
    std::lock_guard lock(planner_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(scratch_.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(int(n), p, p, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(int(n), p, p, FFTW_BACKWARD, flags);
    if (!forward_ || !backward_) throw NumericalError("FFTW could not plan a transform");
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(cplx* data) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
  // Unnormalised.
  void backward(cplx* data) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<cplx> scratch_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

std::vector<double> wavenumbers(std::size_t n, double dz) {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / (double(n) * dz);
  for (std::size_t j = 0; j < n; ++j)
    k[j] = dk * (j < n / 2 ? double(j) : double(j) - double(n));
  return k;
}

struct SpectralMoments {
  double mean_k = 0.0;
  double var_k = 0.0;
  double edge_fraction = 0.0;  // weight in the modes around the Nyquist frequency
};

SpectralMoments spectral_moments(const std::vector<cplx>& psi, const Fft& fft,
                                 const std::vector<double>& k) {
  std::vector<cplx> hat = psi;
  fft.forward(hat.data());
  const std::size_t n = hat.size();
  double w = 0.0, k1 = 0.0, k2 = 0.0, edge = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::norm(hat[j]);
    w += p;
    k1 += p * k[j];
    k2 += p * k[j] * k[j];
    const std::size_t from_nyquist = j > n / 2 ? j - n / 2 : n / 2 - j;
    if (from_nyquist < kEdgeCells / 2 + 1) edge += p;
  }
  SpectralMoments m;
  m.mean_k = k1 / w;
  m.var_k = k2 / w - m.mean_k * m.mean_k;
  m.edge_fraction = edge / w;
  return m;
}

double weight_sq(const SpinWeights& w, Branch b) {
  return b == Branch::Plus ? w.beta_plus_sq : w.beta_minus_sq;
}

kernels::DensitySums density(const GridState& s, Branch b, double origin, bool parallel) {
  const auto& psi = s.psi(b);
  const double z0 = s.z(0);
  return parallel ? kernels::density_sums_omp(psi.data(), psi.size(), z0, s.dz, origin)
                  : kernels::density_sums_serial(psi.data(), psi.size(), z0, s.dz, origin);
}

double edge_mass(const std::vector<cplx>& psi, double dz) {
  double m = 0.0;
  for (std::size_t k = 0; k < kEdgeCells; ++k)
    m += std::norm(psi[k]) + std::norm(psi[psi.size() - 1 - k]);
  return m * dz;
}

// Means and widths of both branches at one instant.
struct Snapshot {
  double t = 0.0;
  std::array<double, 2> mean_z{};
  std::array<double, 2> Q{};
  std::array<double, 2> norm{};
  [[nodiscard]] double d() const { return std::abs(mean_z[0] - mean_z[1]); }
};

Snapshot take_snapshot(const GridState& s, const Snapshot* previous, bool parallel) {
  Snapshot snap;
  snap.t = s.t;
  for (int i = 0; i < 2; ++i) {
    const Branch b = i == 0 ? Branch::Plus : Branch::Minus;
    const double origin = previous ? previous->mean_z[i] : 0.0;
    const auto sums = density(s, b, origin, parallel);
    const double shift = sums.z1 / sums.norm;
    snap.mean_z[i] = origin + shift;
    snap.Q[i] = sums.z2 / sums.norm - shift * shift;
    snap.norm[i] = sums.norm;
  }
  return snap;
}

struct Segment {
  double t0, t1;
  std::size_t steps;
  int lambda;
};

std::vector<Segment> time_segments(const ExperimentConfig& config, const GridSpec& grid,
                                   double t_end) {
  const auto& p = config.protocol;
  const std::array<double, 6> edges{0.0, p.T1, p.T2, p.T3, p.T4, p.T5};
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = std::min(edges[i + 1], t_end);
    if (b <= a) break;
    const auto steps = std::max<std::size_t>(1, std::size_t(std::llround((b - a) * grid.steps_per_second)));
    out.push_back({a, b, steps, lambda_of_t(0.5 * (a + b), p)});
  }
  return out;
}

void check_grid(const ExperimentConfig& config, const GridSpec& grid, double t_end,
                const OracleOptions& options) {
  std::ostringstream why;
  const double dz = grid.dz();
  const double w0 = std::sqrt(config.initial.Q0);
  if (grid.n < 16 || grid.n % 2 != 0) why << "grid size must be even and >= 16; ";
  if (!(grid.z_max > grid.z_min)) why << "empty grid extent; ";
  if (!(grid.steps_per_second > 0.0)) why << "steps_per_second must be positive; ";
  if (!(t_end > 0.0 && t_end <= config.protocol.T5)) why << "t_end outside (0, T5]; ";
  if (dz > w0 / 8.0) why << "dz = " << dz << " m exceeds sqrt(Q0)/8; ";

  double z_far = 0.0, p_max = 0.0;
  if (options.external_field) {
    for (const auto& s : motion_segments(config)) {
      z_far = std::max(z_far, std::abs(s.z_vertex));
      p_max = std::max({p_max, std::abs(s.velocity(s.t0)), std::abs(s.velocity(s.t1))});
    }
    p_max *= config.sphere.mass;
  }
  const double width = std::sqrt(free_spread_Q(t_end, config));
  const double extent = grid.z_max - grid.z_min;
  if (extent < 8.0 * std::max(width, z_far))
    why << "grid extent " << extent << " m below 8 x max(sqrt(Q), |<z>|); ";
  if (2.0 * std::numbers::pi / dz < 8.0 * p_max / config.constants.hbar)
    why << "spectral bandwidth below 8 max|<p>|/hbar; ";
  const std::string s = why.str();
  if (!s.empty()) throw ValidationError("oracle grid: " + s.substr(0, s.size() - 2));
}

}  // namespace

GridState initial_grid(const ExperimentConfig& config, const GridSpec& grid) {
  GridState s;
  s.z_min = grid.z_min;
  s.dz = grid.dz();
  s.t = 0.0;
  s.psi_plus.resize(grid.n);
  const double Q0 = config.initial.Q0;
  double norm = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double z = s.z(k);
    s.psi_plus[k] = std::exp(-z * z / (4.0 * Q0));
    norm += std::norm(s.psi_plus[k]);
  }
  const double scale = 1.0 / std::sqrt(norm * s.dz);
  for (auto& v : s.psi_plus) v *= scale;
  s.psi_minus = s.psi_plus;
  return s;
}

GridMoments extract_moments(const GridState& state, Branch branch, double hbar) {
  const auto& psi = state.psi(branch);
  const auto first = kernels::density_sums_serial(psi.data(), psi.size(), state.z(0), state.dz, 0.0);
  const double mean = first.z1 / first.norm;
  const auto centred =
      kernels::density_sums_serial(psi.data(), psi.size(), state.z(0), state.dz, mean);
  const Fft fft(psi.size());
  const auto k = wavenumbers(psi.size(), state.dz);
  const auto sm = spectral_moments(psi, fft, k);
  GridMoments m;
  m.mean_z = mean + centred.z1 / centred.norm;
  m.Q = centred.z2 / centred.norm - std::pow(centred.z1 / centred.norm, 2);
  m.mean_p = hbar * sm.mean_k;
  m.P = hbar * hbar * sm.var_k;
  m.norm = first.norm;
  return m;
}

CentrePhase centre_phase(const GridState& state, Branch branch, double mean_z, double Q) {
  const auto& psi = state.psi(branch);
  const std::size_t n = psi.size();
  const double width = std::sqrt(Q);
  const double pos = (mean_z - state.z_min) / state.dz - 0.5;
  const auto centre = std::size_t(std::clamp(std::llround(pos), 0LL, (long long)n - 1));
  const auto half = std::max<std::size_t>(2, std::size_t(width / state.dz));
  const std::size_t lo = centre >= half ? centre - half : 0;
  const std::size_t hi = std::min(n - 1, centre + half);

  // Unwrap outwards from the centre cell.
  std::vector<double> phase(hi - lo + 1);
  phase[centre - lo] = std::arg(psi[centre]);
  for (std::size_t k = centre + 1; k <= hi; ++k)
    phase[k - lo] = phase[k - 1 - lo] +
                    std::remainder(std::arg(psi[k]) - std::arg(psi[k - 1]), 2.0 * std::numbers::pi);
  for (std::size_t k = centre; k-- > lo;)
    phase[k - lo] = phase[k + 1 - lo] +
                    std::remainder(std::arg(psi[k]) - std::arg(psi[k + 1]), 2.0 * std::numbers::pi);

  // Weighted least squares on (1, x, x^2), x in units of the width.
  std::array<double, 5> s{};  // sums of w x^j
  std::array<double, 3> r{};  // sums of w x^j phase
  for (std::size_t k = lo; k <= hi; ++k) {
    const double x = (state.z(k) - mean_z) / width;
    const double w = std::norm(psi[k]);
    double xp = 1.0;
    for (int j = 0; j < 5; ++j) {
      s[j] += w * xp;
      if (j < 3) r[j] += w * xp * phase[k - lo];
      xp *= x;
    }
  }
  // Solve [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] c = r by Cramer's rule.
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h,
                 double i) { return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g); };
  const double D = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
  if (!(std::abs(D) > 0.0)) throw NumericalError("centre phase fit is singular");
  const double c0 = det3(r[0], s[1], s[2], r[1], s[2], s[3], r[2], s[3], s[4]) / D;
  const double c1 = det3(s[0], r[0], s[2], s[1], r[1], s[3], s[2], r[2], s[4]) / D;
  const double c2 = det3(s[0], s[1], r[0], s[1], s[2], r[1], s[2], s[3], r[2]) / D;
  CentrePhase cp;
  cp.at_mean = std::remainder(c0, 2.0 * std::numbers::pi);
  cp.slope = c1 / width;
  cp.curvature = c2 / (width * width);
  return cp;
}

PhaseTrack unwrap_history(const std::vector<TrackSample>& history) {
  PhaseTrack track;
  if (history.empty()) return track;
  const double two_pi = 2.0 * std::numbers::pi;
  track.plus.push_back(history.front().plus.phase);
  track.minus.push_back(history.front().minus.phase);
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& a = history[i - 1];
    const auto& b = history[i];
    track.plus.push_back(track.plus.back() + std::remainder(b.plus.phase - a.plus.phase, two_pi));
    track.minus.push_back(track.minus.back() +
                          std::remainder(b.minus.phase - a.minus.phase, two_pi));
    const double jump = std::remainder((b.plus.phase - b.minus.phase) -
                                           (a.plus.phase - a.minus.phase), two_pi);
    if (std::abs(jump) > 0.5 * std::numbers::pi) ++track.ambiguous_steps;
  }
  return track;
}

double extract_phase(const std::vector<TrackSample>& history, Branch branch) {
  if (history.empty()) throw ValidationError("empty oracle history");
  const PhaseTrack track = unwrap_history(history);
  return branch == Branch::Plus ? track.plus.back() : track.minus.back();
}

std::vector<double> convolution_potential(const GridState& state, const ExperimentConfig& config) {
  const std::size_t n = state.size();
  const std::size_t m = 2 * n;
  const Fft fft(m);
  std::vector<cplx> rho(m, 0.0), kernel(m, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    rho[k] = config.weights.beta_plus_sq * std::norm(state.psi_plus[k]) +
             config.weights.beta_minus_sq * std::norm(state.psi_minus[k]);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = v_eff(double(j) * state.dz, config.sphere, config.constants);
    kernel[j] = v;
    if (j > 0) kernel[m - j] = v;
  }
  fft.forward(rho.data());
  fft.forward(kernel.data());
  for (std::size_t j = 0; j < m; ++j) rho[j] *= kernel[j];
  fft.backward(rho.data());
  std::vector<double> V(n);
  for (std::size_t k = 0; k < n; ++k) V[k] = rho[k].real() * state.dz / double(m);
  return V;
}

OracleRun evolve_grid(const ExperimentConfig& config, const GridSpec& grid, double t_end,
                      const OracleOptions& options) {
  require_valid(config);
  check_grid(config, grid, t_end, options);

  const double hbar = config.constants.hbar;
  const double mass = config.sphere.mass;
  const double two_R = 2.0 * config.sphere.radius;
  const std::size_t n = grid.n;
  const Fft fft(n);
  const auto k = wavenumbers(n, grid.dz());

  OracleRun run;
  GridState state = initial_grid(config, grid);
  const double z0 = state.z(0);
  std::vector<double> scratch(n);

  std::map<double, std::vector<cplx>> kinetic_cache;
  auto kinetic = [&](double dt) -> const std::vector<cplx>& {
    auto it = kinetic_cache.find(dt);
    if (it != kinetic_cache.end()) return it->second;
    std::vector<cplx> f(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double phi = 0.5 * hbar * k[j] * k[j] * dt / mass;
      f[j] = cplx(std::cos(phi), -std::sin(phi)) / double(n);
    }
    return kinetic_cache.emplace(dt, std::move(f)).first->second;
  };

  // Potential kick over [a, b], with the self potential rebuilt from the
  // anchor snapshot and the branch distance extrapolated linearly from it
  // to place a regime switch inside the interval.
  auto kick = [&](double a, double b, int lambda, const Snapshot& snap, double d_rate) {
    if (b <= a) return;
    std::vector<std::pair<double, double>> parts{{a, b}};
    if (d_rate != 0.0) {
      const double tc = snap.t + (two_R - snap.d()) / d_rate;
      if (tc > a && tc < b) parts = {{a, tc}, {tc, b}};
    }
    std::vector<double> conv;
    if (options.self_potential == SelfPotential::Convolution)
      conv = convolution_potential(state, config);

    for (int i = 0; i < 2; ++i) {
      const Branch br = i == 0 ? Branch::Plus : Branch::Minus;
      TaylorCoeffs acc;
      if (options.self_potential == SelfPotential::Moments) {
        for (const auto& [u0, u1] : parts) {
          const double mid = 0.5 * (u0 + u1);
          const bool overlap =
              options.force_overlap || snap.d() + d_rate * (mid - snap.t) <= two_R;
          const double nu = overlap ? 1.0 : std::sqrt(weight_sq(config.weights, br));
          const BranchContext ctx{br, nu, snap.d(), snap.mean_z[i], snap.Q[i]};
          const double w = effective_omega_s(snap.Q[i], config.sphere, config.constants,
                                             config.nuclear_correction);
          const TaylorCoeffs c =
              branch_taylor(ctx, snap.mean_z[1 - i], config.sphere, config.constants, w);
          const double len = u1 - u0;
          acc.V0 += c.V0 * len;
          acc.V1 += c.V1 * len;
          acc.V2 += c.V2 * len;
        }
      }
      if (options.external_field) {
        const TaylorCoeffs e = external_taylor(br, lambda, config.protocol, config.constants);
        acc.V0 += e.V0 * (b - a);
        acc.V1 += e.V1 * (b - a);
      }
      for (const auto& off : options.offsets) {
        if (off.branch != br) continue;
        const double len = std::min(b, off.t1) - std::max(a, off.t0);
        if (len > 0.0) acc.V0 += off.V0 * len;
      }
      auto& psi = state.psi(br);
      if (!conv.empty()) {
        for (std::size_t j = 0; j < n; ++j) scratch[j] = conv[j] * (b - a) / hbar;
        if (grid.parallel)
          kernels::table_phase_omp(psi.data(), scratch.data(), n);
        else
          kernels::table_phase_serial(psi.data(), scratch.data(), n);
      }
      if (grid.parallel)
        kernels::quadratic_phase_omp(psi.data(), n, z0, state.dz, acc.V0 / hbar, acc.V1 / hbar,
                                     acc.V2 / hbar);
      else
        kernels::quadratic_phase_serial(psi.data(), n, z0, state.dz, acc.V0 / hbar,
                                        acc.V1 / hbar, acc.V2 / hbar);
    }
  };

  auto record = [&](const Snapshot& snap) {
    TrackSample s;
    s.t = snap.t;
    BranchTrack* tracks[2] = {&s.plus, &s.minus};
    for (int i = 0; i < 2; ++i) {
      const Branch br = i == 0 ? Branch::Plus : Branch::Minus;
      tracks[i]->mean_z = snap.mean_z[i];
      tracks[i]->Q = snap.Q[i];
      tracks[i]->norm = snap.norm[i];
      tracks[i]->phase = centre_phase(state, br, snap.mean_z[i], snap.Q[i]).at_mean;
      run.max_norm_drift = std::max(run.max_norm_drift, std::abs(snap.norm[i] - 1.0));
    }
    run.history.push_back(s);
  };

  auto record_momenta = [&]() {
    MomentumSample m;
    m.t = state.t;
    for (int i = 0; i < 2; ++i) {
      const Branch br = i == 0 ? Branch::Plus : Branch::Minus;
      const auto sm = spectral_moments(state.psi(br), fft, k);
      if (sm.edge_fraction > options.escape_tolerance) {
        std::ostringstream msg;
        msg << "spectral escape: " << to_string(br) << " branch holds " << sm.edge_fraction
            << " of its weight at the Nyquist edge at t=" << state.t << " s";
        throw NumericalError(msg.str());
      }
      (i == 0 ? m.mean_p_plus : m.mean_p_minus) = hbar * sm.mean_k;
      (i == 0 ? m.P_plus : m.P_minus) = hbar * hbar * sm.var_k;
    }
    run.momenta.push_back(m);
  };

  auto check_edges = [&]() {
    for (int i = 0; i < 2; ++i) {
      const Branch br = i == 0 ? Branch::Plus : Branch::Minus;
      const double e = edge_mass(state.psi(br), state.dz);
      if (e > options.escape_tolerance) {
        std::ostringstream msg;
        msg << "grid escape: " << to_string(br) << " branch has probability " << e
            << " within " << kEdgeCells << " cells of the boundary at t=" << state.t << " s";
        throw NumericalError(msg.str());
      }
    }
  };

  std::vector<double> snapshot_times = options.snapshot_times;
  std::sort(snapshot_times.begin(), snapshot_times.end());
  auto next_snapshot = snapshot_times.begin();
  auto maybe_snapshot = [&]() {
    while (next_snapshot != snapshot_times.end() && *next_snapshot <= state.t + 1e-12) {
      run.snapshots.push_back(state);
      ++next_snapshot;
    }
  };

  Snapshot snap = take_snapshot(state, nullptr, grid.parallel);
  record(snap);
  record_momenta();
  maybe_snapshot();
  double d_rate = 0.0;

  for (const auto& seg : time_segments(config, grid, t_end)) {
    const double dt = (seg.t1 - seg.t0) / double(seg.steps);
    const auto& kin = kinetic(dt);
    for (std::size_t s = 0; s < seg.steps; ++s) {
      const double ta = seg.t0 + double(s) * dt;
      const double tb = s + 1 == seg.steps ? seg.t1 : seg.t0 + double(s + 1) * dt;
      const double tm = 0.5 * (ta + tb);
      kick(ta, tm, seg.lambda, snap, d_rate);
      for (int i = 0; i < 2; ++i) {
        auto& psi = state.psi(i == 0 ? Branch::Plus : Branch::Minus);
        fft.forward(psi.data());
        if (grid.parallel)
          kernels::multiply_omp(psi.data(), kin.data(), n);
        else
          kernels::multiply_serial(psi.data(), kin.data(), n);
        fft.backward(psi.data());
      }
      state.t = tb;
      const Snapshot next = take_snapshot(state, &snap, grid.parallel);
      d_rate = (next.d() - snap.d()) / (tb - ta);
      snap = next;
      kick(tm, tb, seg.lambda, snap, d_rate);
      ++run.steps;
      check_edges();
      record(snap);
      if (run.steps % std::max<std::size_t>(1, grid.momentum_stride) == 0) record_momenta();
      maybe_snapshot();
    }
  }
  if (run.momenta.back().t != state.t) record_momenta();

  const PhaseTrack track = unwrap_history(run.history);
  run.delta_phi = track.plus.back() - track.minus.back();
  run.ambiguous_steps = track.ambiguous_steps;
  run.final_state = std::move(state);
  return run;
}

ExperimentConfig oracle_scaled_config() {
  constexpr double ell = 1e-7;
  ExperimentConfig c;
  c.constants = paper_constants();
  c.constants.name = "paper-scaled";
  c.initial = InitialState::from_width(ell);
  // hbar T5 / (m ell^2) = 20: the packet spreads tenfold in width.
  c.sphere.mass = c.constants.hbar * 1.0 / (20.0 * ell * ell);
  c.sphere.radius = 8.0 * ell;
  c.weights = SpinWeights::from_plus(1.0 / 3.0);
  const double T1 = 0.125;
  const double accel = 20.0 * ell / (T1 * T1);  // plateau at <z>_+ = 20 ell
  const double B0_grad = 2.0 * c.sphere.mass * accel / c.constants.g_mu_B();
  c.protocol = Protocol::recombining(T1, 0.5, B0_grad);
  // omega_s T5 = 0.3
  const double T5 = c.protocol.T5;
  const double R3 = std::pow(c.sphere.radius, 3);
  c.constants.G = 0.09 * R3 / (c.sphere.mass * T5 * T5);
  return c;
}

GridSpec oracle_scaled_grid() {
  constexpr double ell = 1e-7;
  GridSpec g;
  g.n = 4096;
  g.z_min = -128.0 * ell;
  g.z_max = 128.0 * ell;
  g.steps_per_second = 16000.0;
  return g;
}

void write_snapshot_csv(std::ostream& out, const GridState& state) {
  const auto old_precision = out.precision(17);
  const auto old_flags = out.flags();
  out << std::scientific;
  out << "# t_s=" << state.t << "\n";
  out << "z_m,re_plus,im_plus,re_minus,im_minus\n";
  for (std::size_t k = 0; k < state.size(); ++k) {
    out << state.z(k) << ',' << state.psi_plus[k].real() << ',' << state.psi_plus[k].imag()
        << ',' << state.psi_minus[k].real() << ',' << state.psi_minus[k].imag() << '\n';
  }
  out.precision(old_precision);
  out.flags(old_flags);
}

}  // namespace selfgrav
