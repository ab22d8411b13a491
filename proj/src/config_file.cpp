#include "selfgrav/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "selfgrav/errors.hpp"

namespace selfgrav {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("config key '" + std::string(key) +
                          "': cannot parse number '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ValidationError("config key '" + std::string(key) +
                        "': expected true/false, got '" + std::string(value) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key,
                                  std::string_view value)>;

template <typename Fn>
Setter numeric(Fn assign) {
  return [assign](ExperimentConfig& c, std::string_view k, std::string_view v) {
    assign(c, parse_double(k, v));
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"constants.name",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.constants = constants_by_name(std::string(v));
       }},
      {"sphere.mass_kg", numeric([](auto& c, double v) { c.sphere.mass = v; })},
      {"sphere.radius_m", numeric([](auto& c, double v) { c.sphere.radius = v; })},
      {"weights.beta_plus_sq",
       numeric([](auto& c, double v) { c.weights = SpinWeights::from_plus(v); })},
      {"protocol.T1_s", numeric([](auto& c, double v) { c.protocol.T1 = v; })},
      {"protocol.T2_s", numeric([](auto& c, double v) { c.protocol.T2 = v; })},
      {"protocol.T3_s", numeric([](auto& c, double v) { c.protocol.T3 = v; })},
      {"protocol.T4_s", numeric([](auto& c, double v) { c.protocol.T4 = v; })},
      {"protocol.T5_s", numeric([](auto& c, double v) { c.protocol.T5 = v; })},
      {"protocol.B0_T", numeric([](auto& c, double v) { c.protocol.B0 = v; })},
      {"protocol.B0_grad_T_per_m",
       numeric([](auto& c, double v) { c.protocol.B0_grad = v; })},
      {"initial.sqrtQ0_m",
       numeric([](auto& c, double v) { c.initial = InitialState::from_width(v); })},
      {"nuclear_correction",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.nuclear_correction = parse_bool(k, v);
       }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text,
                              const ExperimentConfig& defaults) {
  ExperimentConfig cfg = defaults;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": duplicate key '" + std::string(key) + "'");
    }
    it->second(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const ExperimentConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), defaults);
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "constants.name = " << c.constants.name << '\n'
     << "sphere.mass_kg = " << c.sphere.mass << '\n'
     << "sphere.radius_m = " << c.sphere.radius << '\n'
     << "weights.beta_plus_sq = " << c.weights.beta_plus_sq << '\n'
     << "protocol.T1_s = " << c.protocol.T1 << '\n'
     << "protocol.T2_s = " << c.protocol.T2 << '\n'
     << "protocol.T3_s = " << c.protocol.T3 << '\n'
     << "protocol.T4_s = " << c.protocol.T4 << '\n'
     << "protocol.T5_s = " << c.protocol.T5 << '\n'
     << "protocol.B0_T = " << c.protocol.B0 << '\n'
     << "protocol.B0_grad_T_per_m = " << c.protocol.B0_grad << '\n'
     << "initial.sqrtQ0_m = " << std::sqrt(c.initial.Q0) << '\n'
     << "nuclear_correction = " << (c.nuclear_correction ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace selfgrav
