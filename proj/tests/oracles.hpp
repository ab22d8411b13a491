#pragma once

// Reference computations written independently of the library's closed
// forms: adaptive quadrature, the literal c0 expression for A(t), and
// central differences.

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "selfgrav/config.hpp"

namespace oracle {

/// Adaptive Gauss-Kronrod over [a, b], split at the given interior points.
template <class F>
double integrate(F f, double a, double b, std::vector<double> cuts = {}) {
  std::vector<double> pts{a};
  for (double c : cuts)
    if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 15,
                                                                          1e-14);
  return total;
}

/// A(t) = nu (m w/hbar)(1 + c0 e^{-2 i nu w t})/(1 - c0 e^{-2 i nu w t}),
/// c0 = (X0 - nu)/(X0 + nu), X0 = hbar/(2 m w Q0).
inline std::complex<double> a_from_c0(double t, double nu, const selfgrav::ExperimentConfig& c) {
  const double hbar = c.constants.hbar;
  const double m = c.sphere.mass;
  const double w = std::sqrt(c.constants.G * m / std::pow(c.sphere.radius, 3));
  const double X0 = hbar / (2.0 * m * w * c.initial.Q0);
  const double c0 = (X0 - nu) / (X0 + nu);
  const std::complex<double> e = c0 * std::exp(std::complex<double>(0.0, -2.0 * nu * w * t));
  return nu * m * w / hbar * (1.0 + e) / (1.0 - e);
}

template <class F>
double derivative(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
