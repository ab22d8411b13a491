#pragma once

#include <string>
#include <vector>

namespace selfgrav {

/// Physical constants in SI units. Kept as a value so that the whole
/// pipeline can be re-run under a different registry.
struct ConstantsSet {
  double G = 0.0;         ///< m^3 kg^-1 s^-2
  double hbar = 0.0;      ///< J s
  double mu_B = 0.0;      ///< J / T
  double g_factor = 0.0;  ///< dimensionless
  std::string name;

  /// g * mu_B, the spin magnetic-moment scale that multiplies B0 and B0'.
  [[nodiscard]] double g_mu_B() const { return g_factor * mu_B; }
};

/// CODATA-style values.
ConstantsSet codata_constants();

/// Same as codata_constants() except hbar = 1.00e-34 J s; the published
/// numbers for this experiment were produced with that rounding.
ConstantsSet paper_constants();

/// Looks a registry up by name ("paper" or "codata"). Throws
/// ValidationError for anything else.
ConstantsSet constants_by_name(const std::string& name);

std::vector<std::string> constants_names();

}  // namespace selfgrav
