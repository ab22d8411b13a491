#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfgrav/config.hpp"
#include "selfgrav/phase.hpp"

namespace selfgrav {

/// baseline, radius-sweep, q0-sweep, short-protocol, oracle-compare, contributions.
const std::vector<std::string>& scenario_names();

/// Configuration a scenario starts from before config-file overrides.
/// Throws ValidationError for an unknown name.
ExperimentConfig scenario_defaults(const std::string& name);

struct Scenario {
  std::string name;
  ExperimentConfig config;
  std::filesystem::path out_dir;  ///< empty: no artifacts written
  int jobs = 0;                   ///< sweep parallelism, 0 = OpenMP default
  std::size_t curve_samples = kDefaultCurveSamples;
};

struct RunSummary {
  std::string scenario;
  std::string constants_name;
  std::string build_id;
  ExperimentConfig config;
  double delta_phi = 0.0;
  double naive_estimate = 0.0;
  BranchPhase terms;  ///< term-wise plus - minus at T5
  double wall_time_s = 0.0;
  /// Named scalar results, in a fixed order; what expectations refer to.
  std::vector<std::pair<std::string, double>> quantities;
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;

  [[nodiscard]] std::optional<double> quantity(std::string_view name) const;
  [[nodiscard]] std::string to_json() const;
};

/// Runs a scenario and writes its CSV artifacts and summary.json into
/// out_dir. CSV bodies are byte-identical across runs of the same config.
RunSummary run(const Scenario& scenario);

const char* build_id();

struct Expectation {
  std::string quantity;
  double target = 0.0;
  double tolerance = 0.0;
  bool relative = false;  ///< tolerance given as a percentage of |target|
  std::string provenance;
};

/// Lines `quantity,target,tolerance,provenance`; the tolerance is absolute
/// or ends in `%`. Blank lines, `#` comments and a header line starting with
/// `quantity` are skipped. Throws ValidationError on malformed lines.
std::vector<Expectation> parse_expectations(std::string_view text);

struct ComparisonLine {
  Expectation expectation;
  std::optional<double> actual;
  bool pass = false;
};

struct ComparisonReport {
  std::vector<ComparisonLine> lines;
  std::vector<std::string> warnings;

  [[nodiscard]] bool ok() const;
  [[nodiscard]] std::string to_string() const;
};

ComparisonReport compare(const RunSummary& summary, const std::vector<Expectation>& expectations);
ComparisonReport compare(const RunSummary& summary, const std::filesystem::path& expectations);

}  // namespace selfgrav
