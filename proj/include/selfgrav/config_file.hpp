#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "selfgrav/config.hpp"

namespace selfgrav {

/// Flat `key = value` configuration documents.
///
/// Recognised keys (SI units; `#` starts a comment):
///
///     constants.name               paper | codata
///     sphere.mass_kg
///     sphere.radius_m
///     weights.beta_plus_sq         beta_minus_sq is 1 - beta_plus_sq
///     protocol.T1_s ... protocol.T5_s
///     protocol.B0_T
///     protocol.B0_grad_T_per_m
///     initial.sqrtQ0_m
///     nuclear_correction           true | false
///
/// Keys that are absent keep the value of `defaults`. Unknown or duplicate
/// keys and unparsable values throw ValidationError. The result is not
/// validated; call require_valid().
ExperimentConfig parse_config(std::string_view text,
                              const ExperimentConfig& defaults = baseline_config());

ExperimentConfig load_config(const std::filesystem::path& path,
                             const ExperimentConfig& defaults = baseline_config());

/// Inverse of parse_config, 17 significant digits.
std::string format_config(const ExperimentConfig& config);

}  // namespace selfgrav
