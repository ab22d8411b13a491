#include "selfgrav/oracle_kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace selfgrav::kernels {

namespace {

inline complex unit_phase(double phi) { return {std::cos(phi), -std::sin(phi)}; }

}  // namespace

void quadratic_phase_serial(complex* psi, std::size_t n, double z0, double dz, double c0,
                            double c1, double c2) {
  for (std::size_t k = 0; k < n; ++k) {
    const double z = z0 + double(k) * dz;
    psi[k] *= unit_phase(c0 + (c1 + c2 * z) * z);
  }
}

void quadratic_phase_omp(complex* psi, std::size_t n, double z0, double dz, double c0,
                         double c1, double c2) {
  const auto len = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < len; ++k) {
    const double z = z0 + double(k) * dz;
    psi[k] *= unit_phase(c0 + (c1 + c2 * z) * z);
  }
}

void table_phase_serial(complex* psi, const double* phase, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) psi[k] *= unit_phase(phase[k]);
}

void table_phase_omp(complex* psi, const double* phase, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < len; ++k) psi[k] *= unit_phase(phase[k]);
}

void multiply_serial(complex* psi, const complex* factor, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) psi[k] *= factor[k];
}

void multiply_omp(complex* psi, const complex* factor, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < len; ++k) psi[k] *= factor[k];
}

DensitySums density_sums_serial(const complex* psi, std::size_t n, double z0, double dz,
                                double origin) {
  DensitySums s;
  for (std::size_t k = 0; k < n; ++k) {
    const double rho = std::norm(psi[k]);
    const double x = z0 + double(k) * dz - origin;
    s.norm += rho;
    s.z1 += rho * x;
    s.z2 += rho * x * x;
  }
  s.norm *= dz;
  s.z1 *= dz;
  s.z2 *= dz;
  return s;
}

DensitySums density_sums_omp(const complex* psi, std::size_t n, double z0, double dz,
                             double origin) {
  // Fixed chunking, combined in order, keeps the result independent of the
  // thread count so that runs are bit-reproducible.
  constexpr std::size_t kChunks = 64;
  std::array<DensitySums, kChunks> part{};
  const std::size_t per = (n + kChunks - 1) / kChunks;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < kChunks; ++c) {
    const std::size_t lo = std::min(n, c * per);
    const std::size_t hi = std::min(n, lo + per);
    DensitySums s;
    for (std::size_t k = lo; k < hi; ++k) {
      const double rho = std::norm(psi[k]);
      const double x = z0 + double(k) * dz - origin;
      s.norm += rho;
      s.z1 += rho * x;
      s.z2 += rho * x * x;
    }
    part[c] = s;
  }
  DensitySums total;
  for (const auto& s : part) {
    total.norm += s.norm;
    total.z1 += s.z1;
    total.z2 += s.z2;
  }
  total.norm *= dz;
  total.z1 *= dz;
  total.z2 *= dz;
  return total;
}

}  // namespace selfgrav::kernels
