#include "selfgrav/potential.hpp"

#include <cmath>
#include <sstream>

#include "selfgrav/errors.hpp"

namespace selfgrav {

double v_eff(double d, const SphereParams& sphere, const ConstantsSet& constants) {
  const double R = sphere.radius;
  const double gm2 = constants.G * sphere.mass * sphere.mass;
  if (d > 2.0 * R) return -gm2 / d;
  const double x = d / R;
  const double x2 = x * x;
  const double x3 = x2 * x;
  return gm2 / R * (-6.0 / 5.0 + 0.5 * x2 - 3.0 / 16.0 * x3 + x3 * x2 / 160.0);
}

double v_eff_slope(double d, const SphereParams& sphere, const ConstantsSet& constants) {
  const double R = sphere.radius;
  const double gm2 = constants.G * sphere.mass * sphere.mass;
  if (d > 2.0 * R) return gm2 / (d * d);
  const double x = d / R;
  const double x2 = x * x;
  return gm2 / (R * R) * (x - 9.0 / 16.0 * x2 + x2 * x2 / 32.0);
}

double quadratic_v_eff(double d, const SphereParams& sphere, const ConstantsSet& constants) {
  const double R = sphere.radius;
  const double x = d / R;
  return constants.G * sphere.mass * sphere.mass / R * (-6.0 / 5.0 + 0.5 * x * x);
}

double nu_branch(Branch branch, double d, const SpinWeights& weights,
                 const SphereParams& sphere) {
  if (d <= 2.0 * sphere.radius) return 1.0;
  return std::sqrt(branch == Branch::Plus ? weights.beta_plus_sq : weights.beta_minus_sq);
}

double effective_omega_s(double Q, const SphereParams& sphere,
                         const ConstantsSet& constants, bool nuclear_correction) {
  const double w = omega_s(sphere, constants);
  if (nuclear_correction && Q < kNucleonScale * kNucleonScale) return w * kNuclearBoost;
  return w;
}

TaylorCoeffs operator+(const TaylorCoeffs& a, const TaylorCoeffs& b) {
  return {a.V0 + b.V0, a.V1 + b.V1, a.V2 + b.V2, a.expansion_point};
}

BranchContext make_branch_context(Branch branch, double mean_z, double other_mean_z,
                                  double Q, const SpinWeights& weights,
                                  const SphereParams& sphere) {
  BranchContext ctx;
  ctx.branch = branch;
  ctx.mean_z = mean_z;
  ctx.Q = Q;
  ctx.d = std::abs(mean_z - other_mean_z);
  ctx.nu = nu_branch(branch, ctx.d, weights, sphere);
  return ctx;
}

TaylorCoeffs branch_taylor(const BranchContext& ctx, double other_mean_z,
                           const SphereParams& sphere, const ConstantsSet& constants,
                           double omega) {
  const double d_means = std::abs(ctx.mean_z - other_mean_z);
  if (std::abs(d_means - ctx.d) > 1e-9 * std::max(ctx.d, sphere.radius)) {
    std::ostringstream os;
    os << "branch_taylor: context distance " << ctx.d
       << " m disagrees with |<z>_+ - <z>_-| = " << d_means << " m";
    throw ValidationError(os.str());
  }
  const double nu2 = ctx.nu * ctx.nu;
  if (nu2 < 1.0 && ctx.d == 0.0) {
    throw ValidationError(
        "branch_taylor: separated regime (nu < 1) at zero branch distance");
  }

  const double m = sphere.mass;
  const double k = m * omega * omega;  // curvature of the self term
  const double gm2 = constants.G * m * m;
  const double z = ctx.mean_z;

  TaylorCoeffs c;
  c.expansion_point = z;
  c.V2 = 0.5 * k * nu2;
  c.V1 = -k * nu2 * z;
  c.V0 = nu2 * (0.5 * k * (z * z + ctx.Q) - 6.0 / 5.0 * gm2 / sphere.radius);
  if (nu2 < 1.0) c.V0 -= (1.0 - nu2) * gm2 / ctx.d;
  return c;
}

TaylorCoeffs external_taylor(Branch branch, double lambda, const Protocol& protocol,
                             const ConstantsSet& constants) {
  const double amp = sign(branch) * lambda * 0.5 * constants.g_mu_B();
  return {amp * protocol.B0, -amp * protocol.B0_grad, 0.0, 0.0};
}

}  // namespace selfgrav
