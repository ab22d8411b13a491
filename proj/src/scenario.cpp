#include "selfgrav/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include <omp.h>

#include "selfgrav/config_file.hpp"
#include "selfgrav/errors.hpp"
#include "selfgrav/gaussian.hpp"
#include "selfgrav/oracle.hpp"
#include "selfgrav/trajectories.hpp"

#ifndef SELFGRAV_BUILD_ID
#define SELFGRAV_BUILD_ID "unknown"
#endif

namespace selfgrav {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

// Collects rows and writes them with a comment line naming the run.
class Csv {
 public:
  Csv(const RunSummary& s, std::vector<std::string> columns) : columns_(std::move(columns)) {
    body_ << "# scenario=" << s.scenario << " constants=" << s.constants_name
          << " build=" << s.build_id << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) body_ << (i ? "," : "") << columns_[i];
    body_ << '\n';
  }
  void row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw std::logic_error("csv row width");
    for (std::size_t i = 0; i < values.size(); ++i) body_ << (i ? "," : "") << num(values[i]);
    body_ << '\n';
  }
  void row_text(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) body_ << (i ? "," : "") << values[i];
    body_ << '\n';
  }
  void write(const std::filesystem::path& dir, const std::string& name, RunSummary& s) const {
    if (dir.empty()) return;
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << body_.str();
    if (!out) throw ValidationError("cannot write " + path.string());
    s.artifacts.push_back(path);
  }

 private:
  std::vector<std::string> columns_;
  std::ostringstream body_;
};

void add(RunSummary& s, const std::string& name, double v) { s.quantities.emplace_back(name, v); }

void fill_closed_form(RunSummary& s, const PhaseModel& model) {
  const auto& c = model.config();
  const PhaseBreakdown b = model.breakdown(c.protocol.T5);
  s.delta_phi = b.delta_phi;
  s.naive_estimate = naive_estimate(c);
  s.terms = b.diff;
  const double plateau_d = 2.0 * mean_state(Branch::Plus, 0.5 * (c.protocol.T2 + c.protocol.T3), c).mean_z;
  add(s, "delta_phi", b.delta_phi);
  add(s, "naive_estimate", s.naive_estimate);
  add(s, "phase_ratio", s.naive_estimate != 0.0 ? b.delta_phi / s.naive_estimate : 0.0);
  add(s, "short_protocol_estimate", short_protocol_estimate(c));
  add(s, "separation_time", separation_time(c));
  add(s, "omega_s", omega_s(c.sphere, c.constants));
  add(s, "omega_trap", omega_trap(c.initial, c.sphere, c.constants));
  add(s, "plateau_distance", plateau_d);
  add(s, "plateau_distance_over_2R", plateau_d / (2.0 * c.sphere.radius));
  add(s, "i1_diff", b.diff.i1);
  add(s, "i2_diff", b.diff.i2);
  add(s, "i2_contribution", -b.diff.i2);
  add(s, "i2_contribution_estimate", i2_difference_estimate(c));
  add(s, "const_self_diff", b.diff.const_self);
  add(s, "newton_diff", b.diff.newton_cross);
  add(s, "classical_diff", b.diff.classical);
  add(s, "boundary_diff", b.diff.boundary_zp + b.diff.boundary_width);
}

void write_phase_curve(RunSummary& s, const PhaseModel& model, const Scenario& sc,
                       const std::string& file) {
  const PhaseCurve pc = phase_curve(model, sc.curve_samples);
  Csv csv(s, {"t_s", "delta_phi_rad", "i1_diff", "i2_diff", "const_self_diff", "newton_diff",
              "classical_diff", "boundary_diff"});
  for (std::size_t i = 0; i < pc.t.size(); ++i)
    csv.row({pc.t[i], pc.delta_phi[i], pc.i1_diff[i], pc.i2_diff[i], pc.const_self_diff[i],
             pc.newton_diff[i], pc.classical_diff[i], pc.boundary_diff[i]});
  csv.write(sc.out_dir, file, s);
}

void write_spread_curve(RunSummary& s, const ExperimentConfig& c, const Scenario& sc) {
  const SpreadCurve curve = spread_curve(c, sc.curve_samples);
  Csv csv(s, {"t_s", "Q_plus", "Q_minus", "Q_free"});
  for (std::size_t i = 0; i < curve.t.size(); ++i)
    csv.row({curve.t[i], curve.Q_plus[i], curve.Q_minus[i], curve.Q_free[i]});
  csv.write(sc.out_dir, "spread_curve.csv", s);
}

Csv contributions_csv(const RunSummary& s, const PhaseModel& model, std::size_t samples) {
  std::vector<std::string> cols{"t_s"};
  for (const char* term : {"boundary_zp", "boundary_width", "classical", "i1", "i2", "const_self",
                           "newton_cross"})
    for (const char* side : {"plus", "minus", "diff"}) cols.push_back(std::string(term) + "_" + side);
  cols.push_back("delta_phi_rad");
  Csv csv(s, cols);
  const double T5 = model.config().protocol.T5;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? T5 : T5 * double(k) / double(samples - 1);
    const PhaseBreakdown b = model.breakdown(t);
    std::vector<double> row{t};
    auto put = [&](double BranchPhase::*field) {
      row.push_back(b.plus.*field);
      row.push_back(b.minus.*field);
      row.push_back(b.diff.*field);
    };
    put(&BranchPhase::boundary_zp);
    put(&BranchPhase::boundary_width);
    put(&BranchPhase::classical);
    put(&BranchPhase::i1);
    put(&BranchPhase::i2);
    put(&BranchPhase::const_self);
    put(&BranchPhase::newton_cross);
    row.push_back(b.delta_phi);
    csv.row(row);
  }
  return csv;
}

std::string width_tag(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", w);
  return buf;
}

void run_radius_sweep(RunSummary& s, const Scenario& sc) {
  std::vector<double> radii;
  for (int i = 2; i <= 20; ++i) radii.push_back(1e-7 * i);
  const auto points = radius_sweep(sc.config, radii, sc.jobs);
  Csv csv(s, {"radius_m", "mass_kg", "delta_phi_rad", "error"});
  std::vector<double> lx, ly;
  int failures = 0;
  for (const auto& p : points) {
    csv.row_text({num(p.radius), num(p.mass), p.ok() ? num(p.delta_phi) : "nan",
                  p.ok() ? "" : '"' + p.error + '"'});
    if (!p.ok()) {
      ++failures;
      s.warnings.push_back("radius " + num(p.radius) + ": " + p.error);
      continue;
    }
    if (p.radius >= 0.5e-6 - 1e-12 && p.radius <= 2e-6 + 1e-12 && p.delta_phi != 0.0) {
      lx.push_back(std::log(p.radius));
      ly.push_back(std::log(std::abs(p.delta_phi)));
    }
  }
  csv.write(sc.out_dir, "radius_sweep.csv", s);
  double slope = std::nan("");
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    slope = sxy / sxx;
  }
  add(s, "sweep_slope", slope);
  add(s, "sweep_failures", failures);
}

void run_q0_sweep(RunSummary& s, const Scenario& sc) {
  const std::vector<double> widths{1e-9, 1e-10, 1e-13};
  std::vector<ExperimentConfig> configs;
  for (double w : widths) {
    ExperimentConfig c = sc.config;
    c.initial = InitialState::from_width(w);
    require_valid(c);
    configs.push_back(c);
  }
  std::vector<PhaseBreakdown> finals(widths.size());
  std::vector<std::string> errors(widths.size());
  const int threads = sc.jobs > 0 ? sc.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < widths.size(); ++i) {
    try {
      finals[i] = PhaseModel(configs[i]).breakdown(configs[i].protocol.T5);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!errors[i].empty()) throw NumericalError("sqrt(Q0) = " + width_tag(widths[i]) + ": " + errors[i]);
    const PhaseModel model(configs[i]);
    contributions_csv(s, model, sc.curve_samples)
        .write(sc.out_dir, "contributions_sqrtQ0_" + width_tag(widths[i]) + ".csv", s);
    const std::string tag = "_sqrtQ0_" + width_tag(widths[i]);
    add(s, "delta_phi" + tag, finals[i].delta_phi);
    add(s, "i1_diff" + tag, finals[i].diff.i1);
    add(s, "i2_diff" + tag, finals[i].diff.i2);
    add(s, "omega_trap" + tag, omega_trap(configs[i].initial, configs[i].sphere, configs[i].constants));
    add(s, "i2_contribution_estimate" + tag, i2_difference_estimate(configs[i]));
  }
}

void run_oracle_compare(RunSummary& s, const Scenario& sc) {
  const ExperimentConfig& c = sc.config;
  const PhaseModel model(c);
  OracleOptions options;
  options.snapshot_times = {c.protocol.T5};
  const OracleRun r = evolve_grid(c, oracle_scaled_grid(), c.protocol.T5, options);
  const double closed = model.delta_phi(c.protocol.T5);
  double worst_q = 0.0;
  Csv csv(s, {"t_s", "Q_plus_grid", "Q_plus_closed", "Q_minus_grid", "Q_minus_closed",
              "mean_z_plus_grid", "mean_z_plus_ehrenfest"});
  for (const auto& h : r.history) {
    const double qp = model.width(Branch::Plus).Q(h.t);
    const double qm = model.width(Branch::Minus).Q(h.t);
    worst_q = std::max({worst_q, std::abs(h.plus.Q / qp - 1.0), std::abs(h.minus.Q / qm - 1.0)});
    csv.row({h.t, h.plus.Q, qp, h.minus.Q, qm, h.plus.mean_z, mean_state(Branch::Plus, h.t, c).mean_z});
  }
  csv.write(sc.out_dir, "oracle_history.csv", s);
  if (!sc.out_dir.empty() && !r.snapshots.empty()) {
    const auto path = sc.out_dir / "oracle_snapshot_T5.csv";
    std::ofstream out(path, std::ios::binary);
    write_snapshot_csv(out, r.snapshots.back());
    if (!out) throw ValidationError("cannot write " + path.string());
    s.artifacts.push_back(path);
  }
  add(s, "oracle_delta_phi", r.delta_phi);
  add(s, "closed_delta_phi", closed);
  add(s, "oracle_relative_error", std::abs(r.delta_phi / closed - 1.0));
  add(s, "oracle_worst_Q_error", worst_q);
  add(s, "oracle_norm_drift", r.max_norm_drift);
  add(s, "oracle_ambiguous_steps", r.ambiguous_steps);
  add(s, "omega_s_T5", omega_s(c.sphere, c.constants) * c.protocol.T5);
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"baseline",       "radius-sweep",   "q0-sweep",
                                              "short-protocol", "oracle-compare", "contributions"};
  return names;
}

ExperimentConfig scenario_defaults(const std::string& name) {
  if (name == "short-protocol") return short_protocol_config();
  if (name == "oracle-compare") return oracle_scaled_config();
  if (std::find(scenario_names().begin(), scenario_names().end(), name) == scenario_names().end())
    throw ValidationError("unknown scenario '" + name + "'");
  return baseline_config();
}

const char* build_id() { return SELFGRAV_BUILD_ID; }

std::optional<double> RunSummary::quantity(std::string_view name) const {
  for (const auto& [k, v] : quantities)
    if (k == name) return v;
  return std::nullopt;
}

std::string RunSummary::to_json() const {
  using nlohmann::ordered_json;
  const auto& c = config;
  ordered_json j;
  j["scenario"] = scenario;
  j["constants"] = constants_name;
  j["build_id"] = build_id;
  j["config"] = {
      {"constants.name", c.constants.name},
      {"constants.G", c.constants.G},
      {"constants.hbar", c.constants.hbar},
      {"constants.mu_B", c.constants.mu_B},
      {"constants.g_factor", c.constants.g_factor},
      {"sphere.mass_kg", c.sphere.mass},
      {"sphere.radius_m", c.sphere.radius},
      {"weights.beta_plus_sq", c.weights.beta_plus_sq},
      {"weights.beta_minus_sq", c.weights.beta_minus_sq},
      {"protocol.T1_s", c.protocol.T1},
      {"protocol.T2_s", c.protocol.T2},
      {"protocol.T3_s", c.protocol.T3},
      {"protocol.T4_s", c.protocol.T4},
      {"protocol.T5_s", c.protocol.T5},
      {"protocol.B0_T", c.protocol.B0},
      {"protocol.B0_grad_T_per_m", c.protocol.B0_grad},
      {"initial.sqrtQ0_m", std::sqrt(c.initial.Q0)},
      {"nuclear_correction", c.nuclear_correction},
  };
  j["delta_phi_rad"] = delta_phi;
  j["naive_estimate_rad"] = naive_estimate;
  j["terms"] = {{"boundary_zp", terms.boundary_zp},   {"boundary_width", terms.boundary_width},
                {"classical", terms.classical},       {"i1", terms.i1},
                {"i2", terms.i2},                     {"const_self", terms.const_self},
                {"newton_cross", terms.newton_cross}};
  ordered_json q = ordered_json::object();
  for (const auto& [k, v] : quantities) q[k] = std::isfinite(v) ? ordered_json(v) : ordered_json();
  j["quantities"] = q;
  j["wall_time_s"] = wall_time_s;
  ordered_json files = ordered_json::array();
  for (const auto& a : artifacts) files.push_back(a.filename().string());
  j["artifacts"] = files;
  j["warnings"] = warnings;
  return j.dump(2);
}

RunSummary run(const Scenario& sc) {
  const auto start = std::chrono::steady_clock::now();
  require_valid(sc.config);
  if (!sc.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(sc.out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + sc.out_dir.string());
  }
  RunSummary s;
  s.scenario = sc.name;
  s.constants_name = sc.config.constants.name;
  s.build_id = build_id();
  s.config = sc.config;

  const PhaseModel model(sc.config);
  fill_closed_form(s, model);

  if (sc.name == "baseline" || sc.name == "short-protocol") {
    write_phase_curve(s, model, sc, "phase_curve.csv");
    write_spread_curve(s, sc.config, sc);
  } else if (sc.name == "contributions") {
    contributions_csv(s, model, sc.curve_samples).write(sc.out_dir, "contributions.csv", s);
  } else if (sc.name == "radius-sweep") {
    run_radius_sweep(s, sc);
  } else if (sc.name == "q0-sweep") {
    run_q0_sweep(s, sc);
  } else if (sc.name == "oracle-compare") {
    run_oracle_compare(s, sc);
  } else {
    throw ValidationError("unknown scenario '" + sc.name + "'");
  }

  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!sc.out_dir.empty()) {
    const auto path = sc.out_dir / "summary.json";
    s.artifacts.push_back(path);
    std::ofstream out(path, std::ios::binary);
    out << s.to_json() << '\n';
    if (!out) throw ValidationError("cannot write " + path.string());
  }
  return s;
}

std::vector<Expectation> parse_expectations(std::string_view text) {
  std::vector<Expectation> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 8, "quantity") == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      const auto a = f.find_first_not_of(" \t\r");
      const auto b = f.find_last_not_of(" \t\r");
      fields.push_back(a == std::string::npos ? "" : f.substr(a, b - a + 1));
    }
    auto bad = [&](const std::string& why) {
      return ValidationError("expectations line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 4) throw bad("expected 4 fields, got " + std::to_string(fields.size()));
    Expectation e;
    e.quantity = fields[0];
    e.provenance = fields[3];
    if (e.quantity.empty()) throw bad("empty quantity");
    try {
      std::size_t used = 0;
      e.target = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw bad("bad target '" + fields[1] + "'");
      std::string tol = fields[2];
      if (!tol.empty() && tol.back() == '%') {
        e.relative = true;
        tol.pop_back();
      }
      e.tolerance = std::stod(tol, &used);
      if (used != tol.size() || e.tolerance < 0.0) throw bad("bad tolerance '" + fields[2] + "'");
    } catch (const std::logic_error&) {
      throw bad("unparsable number");
    }
    out.push_back(e);
  }
  return out;
}

bool ComparisonReport::ok() const {
  return std::all_of(lines.begin(), lines.end(), [](const ComparisonLine& l) { return l.pass; });
}

std::string ComparisonReport::to_string() const {
  std::ostringstream os;
  for (const auto& w : warnings) os << "WARN " << w << '\n';
  for (const auto& l : lines) {
    const auto& e = l.expectation;
    os << (l.pass ? "PASS " : "FAIL ") << e.quantity << " actual="
       << (l.actual ? num(*l.actual) : std::string("missing")) << " target=" << e.target
       << " tol=" << e.tolerance << (e.relative ? "%" : "") << " [" << e.provenance << "]\n";
  }
  return os.str();
}

ComparisonReport compare(const RunSummary& summary, const std::vector<Expectation>& expectations) {
  ComparisonReport r;
  if (expectations.empty()) r.warnings.push_back("expectations file lists no quantities");
  for (const auto& e : expectations) {
    ComparisonLine l;
    l.expectation = e;
    l.actual = summary.quantity(e.quantity);
    if (l.actual && std::isfinite(*l.actual)) {
      const double tol = e.relative ? std::abs(e.target) * e.tolerance / 100.0 : e.tolerance;
      l.pass = std::abs(*l.actual - e.target) <= tol;
    }
    r.lines.push_back(l);
  }
  return r;
}

ComparisonReport compare(const RunSummary& summary, const std::filesystem::path& expectations) {
  std::ifstream in(expectations, std::ios::binary);
  if (!in) throw ValidationError("cannot read expectations file " + expectations.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return compare(summary, parse_expectations(buf.str()));
}

}  // namespace selfgrav
