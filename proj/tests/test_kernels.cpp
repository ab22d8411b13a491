#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "selfgrav/oracle_kernels.hpp"

using namespace selfgrav::kernels;

namespace {
std::vector<complex> random_field(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<complex> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

double max_diff(const std::vector<complex>& a, const std::vector<complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("serial and OpenMP kernels agree") {
  for (std::size_t n : {std::size_t(1), std::size_t(63), std::size_t(4096), std::size_t(10007)}) {
    const auto base = random_field(n, unsigned(n));
    const double z0 = -3.0, dz = 6.0 / double(n);

    auto a = base, b = base;
    quadratic_phase_serial(a.data(), n, z0, dz, 0.3, -1.7, 4.2);
    quadratic_phase_omp(b.data(), n, z0, dz, 0.3, -1.7, 4.2);
    CHECK(max_diff(a, b) == 0.0);

    std::vector<double> table(n);
    for (std::size_t k = 0; k < n; ++k) table[k] = std::sin(0.01 * double(k));
    a = base;
    b = base;
    table_phase_serial(a.data(), table.data(), n);
    table_phase_omp(b.data(), table.data(), n);
    CHECK(max_diff(a, b) == 0.0);

    const auto f = random_field(n, 99);
    a = base;
    b = base;
    multiply_serial(a.data(), f.data(), n);
    multiply_omp(b.data(), f.data(), n);
    CHECK(max_diff(a, b) == 0.0);

    const auto s = density_sums_serial(base.data(), n, z0, dz, 0.4);
    const auto p = density_sums_omp(base.data(), n, z0, dz, 0.4);
    CHECK(p.norm == doctest::Approx(s.norm).epsilon(1e-13));
    CHECK(p.z1 == doctest::Approx(s.z1).epsilon(1e-12).scale(s.norm));
    CHECK(p.z2 == doctest::Approx(s.z2).epsilon(1e-12));
    // and the parallel sums do not depend on scheduling
    const auto p2 = density_sums_omp(base.data(), n, z0, dz, 0.4);
    CHECK(p2.norm == p.norm);
    CHECK(p2.z1 == p.z1);
    CHECK(p2.z2 == p.z2);
  }
}

TEST_CASE("phase kernels preserve modulus") {
  const std::size_t n = 1000;
  auto psi = random_field(n, 3);
  const auto before = psi;
  quadratic_phase_omp(psi.data(), n, 0.0, 1e-3, 1.0, 2.0, 3.0);
  for (std::size_t k = 0; k < n; ++k)
    CHECK(std::abs(psi[k]) == doctest::Approx(std::abs(before[k])).epsilon(1e-14));
  const double z = 5e-3;  // k = 5
  CHECK(std::arg(psi[5] / before[5]) == doctest::Approx(-(1.0 + 2.0 * z + 3.0 * z * z)).epsilon(1e-12));
}

TEST_CASE("density sums of a gaussian") {
  const std::size_t n = 2000;
  const double z0 = -10.0, dz = 20.0 / double(n);
  std::vector<complex> psi(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = z0 + (double(k) + 0.5) * dz;
    psi[k] = std::exp(-(z - 1.0) * (z - 1.0) / 4.0);  // |psi|^2 has variance 1
  }
  const auto s = density_sums_omp(psi.data(), n, z0 + 0.5 * dz, dz, 1.0);
  CHECK(s.norm == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(std::abs(s.z1 / s.norm) < 1e-12);
  CHECK(s.z2 / s.norm == doctest::Approx(1.0).epsilon(1e-12));
}
