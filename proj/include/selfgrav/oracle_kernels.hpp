#pragma once

#include <complex>
#include <cstddef>

// Per-node kernels of the split-step oracle. Each comes as a serial
// reference and an OpenMP version; the two must agree to rounding.
namespace selfgrav::kernels {

using complex = std::complex<double>;

/// Sums of |psi|^2, z |psi|^2 and z^2 |psi|^2 over the grid (times dz),
/// with z_k = z0 + k dz. z is taken relative to `origin` for z2.
struct DensitySums {
  double norm = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
};

/// psi_k *= exp(-i (c0 + c1 z_k + c2 z_k^2)).
void quadratic_phase_serial(complex* psi, std::size_t n, double z0, double dz, double c0,
                            double c1, double c2);
void quadratic_phase_omp(complex* psi, std::size_t n, double z0, double dz, double c0,
                         double c1, double c2);

/// psi_k *= exp(-i phase_k).
void table_phase_serial(complex* psi, const double* phase, std::size_t n);
void table_phase_omp(complex* psi, const double* phase, std::size_t n);

/// psi_k *= factor_k.
void multiply_serial(complex* psi, const complex* factor, std::size_t n);
void multiply_omp(complex* psi, const complex* factor, std::size_t n);

DensitySums density_sums_serial(const complex* psi, std::size_t n, double z0, double dz,
                                double origin);
DensitySums density_sums_omp(const complex* psi, std::size_t n, double z0, double dz,
                             double origin);

}  // namespace selfgrav::kernels
