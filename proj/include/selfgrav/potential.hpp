#pragma once

#include "selfgrav/config.hpp"

namespace selfgrav {

enum class Branch { Plus, Minus };

/// +1 for the spin-up branch, -1 for spin-down.
constexpr double sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }
constexpr const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }
constexpr Branch other(Branch b) { return b == Branch::Plus ? Branch::Minus : Branch::Plus; }

/// Self-energy of two copies of a homogeneous sphere whose centres are a
/// distance d apart: the overlap polynomial for d <= 2R, -G m^2/d beyond.
double v_eff(double d, const SphereParams& sphere, const ConstantsSet& constants);

/// d/dd of v_eff.
double v_eff_slope(double d, const SphereParams& sphere, const ConstantsSet& constants);

/// Two-term truncation G m^2/R (-6/5 + (d/R)^2/2).
double quadratic_v_eff(double d, const SphereParams& sphere, const ConstantsSet& constants);

/// 1 while the branches overlap (d <= 2R, inclusive), |beta_branch| once they
/// have separated.
double nu_branch(Branch branch, double d, const SpinWeights& weights,
                 const SphereParams& sphere);

/// Packet widths below this scale resolve the nuclei of the lattice.
inline constexpr double kNucleonScale = 1e-12;
/// Boost of omega_s below kNucleonScale: (1e-10 / 1e-12)^{3/2}.
inline constexpr double kNuclearBoost = 1000.0;

/// omega_s, boosted by kNuclearBoost when the correction is enabled and
/// sqrt(Q) < kNucleonScale.
double effective_omega_s(double Q, const SphereParams& sphere,
                         const ConstantsSet& constants, bool nuclear_correction);

/// Coefficients of V0 + V1 z + V2 z^2.
struct TaylorCoeffs {
  double V0 = 0.0;  ///< J
  double V1 = 0.0;  ///< J/m
  double V2 = 0.0;  ///< J/m^2
  double expansion_point = 0.0;  ///< m

  [[nodiscard]] double operator()(double z) const { return V0 + (V1 + V2 * z) * z; }
};

TaylorCoeffs operator+(const TaylorCoeffs& a, const TaylorCoeffs& b);

struct BranchContext {
  Branch branch = Branch::Plus;
  double nu = 1.0;
  double d = 0.0;       ///< |<z>_+ - <z>_-|, m
  double mean_z = 0.0;  ///< <z> of this branch, m
  double Q = 0.0;       ///< position variance of this branch, m^2
};

BranchContext make_branch_context(Branch branch, double mean_z, double other_mean_z,
                                  double Q, const SpinWeights& weights,
                                  const SphereParams& sphere);

/// Quadratic self-gravity potential felt by one branch: the nu^2-weighted
/// harmonic self term around <z> plus the Newton pull of the other branch
/// frozen at its mean. `omega` is the (possibly boosted) omega_s.
/// V1 + 2 V2 <z> = 0 always holds.
///
/// Throws ValidationError when nu < 1 with d == 0, which the regime switch
/// never produces, or when `other_mean_z` disagrees with ctx.d.
TaylorCoeffs branch_taylor(const BranchContext& ctx, double other_mean_z,
                           const SphereParams& sphere, const ConstantsSet& constants,
                           double omega);

/// Stern-Gerlach potential +/- lambda (g mu_B / 2)(B0 - B0' z).
TaylorCoeffs external_taylor(Branch branch, double lambda, const Protocol& protocol,
                             const ConstantsSet& constants);

}  // namespace selfgrav
