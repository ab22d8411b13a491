#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "selfgrav/config_file.hpp"
#include "selfgrav/errors.hpp"
#include "selfgrav/scenario.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kNumericalExit = 3;
constexpr int kComparisonExit = 1;

int report_error(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace selfgrav;

  CLI::App app{"Self-gravity phase shift of a Stern-Gerlach superposed microsphere"};
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::string constants;
  std::string expectations;
  int jobs = 0;
  std::size_t samples = kDefaultCurveSamples;

  app.add_option("scenario", scenario, "Scenario to run")
      ->required()
      ->check(CLI::IsMember(scenario_names()));
  app.add_option("--config", config_path, "Key-value config file applied over the scenario defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Directory for CSV artifacts and summary.json");
  app.add_option("--constants", constants, "Constants set")
      ->check(CLI::IsMember(constants_names()));
  app.add_option("--jobs", jobs, "Parallel sweep workers (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--expectations", expectations, "CSV of quantity,target,tolerance,provenance")
      ->check(CLI::ExistingFile);
  app.add_option("--samples", samples, "Time samples in curve CSVs")->check(CLI::Range(2, 1000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  try {
    ExperimentConfig defaults = scenario_defaults(scenario);
    if (!constants.empty()) {
      if (scenario == "oracle-compare")
        throw ValidationError("oracle-compare runs at its own scaled constants; drop --constants");
      defaults.constants = constants_by_name(constants);
    }
    ExperimentConfig config = config_path.empty() ? defaults : load_config(config_path, defaults);
    if (!constants.empty() && config.constants.name != constants)
      throw ValidationError("config file selects constants '" + config.constants.name +
                            "' but --constants is '" + constants + "'");

    Scenario sc;
    sc.name = scenario;
    sc.config = config;
    sc.out_dir = out_dir;
    sc.jobs = jobs;
    sc.curve_samples = samples;
    const RunSummary summary = run(sc);

    std::cout << "scenario " << summary.scenario << " (constants " << summary.constants_name
              << ", build " << summary.build_id << ")\n";
    std::cout.precision(10);
    std::cout << "delta_phi(T5) = " << summary.delta_phi << " rad\n"
              << "naive estimate = " << summary.naive_estimate << " rad\n";
    std::cout.precision(4);
    std::cout << "wall time = " << summary.wall_time_s << " s\n";
    for (const auto& w : summary.warnings) std::cout << "warning: " << w << '\n';
    for (const auto& a : summary.artifacts) std::cout << "wrote " << a.string() << '\n';

    if (!expectations.empty()) {
      const ComparisonReport report = compare(summary, std::filesystem::path(expectations));
      std::cout << report.to_string();
      if (!report.ok()) return kComparisonExit;
    }
  } catch (const ValidationError& e) {
    return report_error("validation", e.what(), kValidationExit);
  } catch (const NumericalError& e) {
    return report_error("numerical", e.what(), kNumericalExit);
  }
  return 0;
}
