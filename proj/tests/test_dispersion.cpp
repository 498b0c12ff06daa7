#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "opo/errors.hpp"

using namespace opo;

namespace {

/// Direct evaluation of the extraordinary-index series, written out independently.
double series_index(double lambda_um, double t_c) {
  const double f = (t_c - 24.5) * (t_c + 570.82);
  const double l2 = lambda_um * lambda_um;
  const double n2 = 5.756 + 2.860e-6 * f + (0.0983 + 4.700e-8 * f) / (l2 - std::pow(0.2020 + 6.113e-8 * f, 2)) +
                    (189.32 + 1.516e-4 * f) / (l2 - 12.52 * 12.52) - 1.32e-2 * l2;
  return std::sqrt(n2);
}

/// n - lambda dn/dlambda with a five-point stencil.
double stencil_group_index(double lambda, double t_k, const CrystalSpec& c) {
  const double h = 1e-4 * lambda;
  auto n = [&](double l) { return refractive_index(l, t_k, c); };
  const double d = (-n(lambda + 2 * h) + 8 * n(lambda + h) - 8 * n(lambda - h) + n(lambda - 2 * h)) / (12 * h);
  return n(lambda) - lambda * d;
}

} // namespace

TEST_CASE("refractive index reproduces the published series") {
  const auto c = fixtures::reference_crystal();
  const double t = celsius_to_kelvin(43.77);
  for (double um : {0.78024, 1.0, 1.2, 1.5, 1.56, 1.62, 2.0, 3.0}) {
    CHECK(refractive_index(um * 1e-6, t, c) == doctest::Approx(series_index(um, 43.77)).epsilon(1e-13));
  }
}

TEST_CASE("refractive index golden value at the operating point") {
  const auto c = fixtures::reference_crystal();
  const double n = refractive_index(1560e-9, celsius_to_kelvin(43.77), c);
  CHECK(n == doctest::Approx(2.14).epsilon(0.01 / 2.14));
  CHECK(n == doctest::Approx(2.1355575).epsilon(1e-7));
}

TEST_CASE("normal dispersion ordering and slope") {
  const auto c = fixtures::reference_crystal();
  const double t = 316.92;
  CHECK(refractive_index(780.24e-9, t, c) > refractive_index(1560.48e-9, t, c));
  double prev = refractive_index(1500e-9, t, c);
  for (int i = 1; i <= 120; ++i) {
    const double n = refractive_index((1500.0 + i) * 1e-9, t, c);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("group index agrees with an independent stencil derivative") {
  const auto c = fixtures::reference_crystal();
  for (double t_c : {20.0, 43.77, 100.0, 199.0}) {
    for (double nm = 600.0; nm <= 3900.0; nm += 150.0) {
      const double lambda = nm * 1e-9;
      const double t = celsius_to_kelvin(t_c);
      CHECK(group_index(lambda, t, c) == doctest::Approx(stencil_group_index(lambda, t, c)).epsilon(1e-6));
    }
  }
  const double t = celsius_to_kelvin(43.77);
  CHECK(group_index(1560e-9, t, c) >= refractive_index(1560e-9, t, c));
  CHECK(group_index(1560e-9, t, c) == doctest::Approx(2.17943).epsilon(1e-5));
}

TEST_CASE("group index is smooth across the C-band") {
  const auto c = fixtures::reference_crystal();
  const double t = celsius_to_kelvin(43.77);
  for (double nm = 1530.0; nm < 1565.0; nm += 0.5) {
    const double a = group_index(nm * 1e-9, t, c);
    const double b = group_index(nm * 1e-9 + 1e-12, t, c);
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("wavevector definition and monotonicity") {
  const auto c = fixtures::reference_crystal();
  const double t = celsius_to_kelvin(43.77);
  const double lo = wavelength_to_frequency(1565e-9);
  const double hi = wavelength_to_frequency(1530e-9);
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double nu = lo + (hi - lo) * i / 999.0;
    const double k = wavevector(nu, t, c);
    CHECK(k * kSpeedOfLight / (2 * kPi * nu) ==
          doctest::Approx(refractive_index(frequency_to_wavelength(nu), t, c)).epsilon(1e-12));
    CHECK(k > prev);
    CHECK(wavevector(2 * nu, t, c) > 2 * k);
    prev = k;
  }
}

TEST_CASE("index rises with temperature") {
  const auto c = fixtures::reference_crystal();
  CHECK(refractive_index(1560e-9, 330.0, c) > refractive_index(1560e-9, 310.0, c));
}

TEST_CASE("validity window is enforced") {
  const auto c = fixtures::reference_crystal();
  CHECK_THROWS_AS(refractive_index(0.4e-6, 300.0, c), DomainError);
  CHECK_THROWS_AS(refractive_index(1.56e-6, 250.0, c), DomainError);
  CHECK_THROWS_AS(refractive_index(1.56e-6, 500.0, c), DomainError);
  CHECK_THROWS_AS(group_index(4.0e-6, 300.0, c), DomainError);
  CHECK_THROWS_WITH_AS(refractive_index(5e-6, 300.0, c), doctest::Contains("wavelength"), DomainError);
}

TEST_CASE("constant-index dataset has no dispersion") {
  auto c = fixtures::reference_crystal();
  c.dispersion = SellmeierCoefficients::constant(2.2);
  CHECK(refractive_index(1.3e-6, 300.0, c) == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(group_index(1.3e-6, 300.0, c) == doctest::Approx(2.2).epsilon(1e-9));
}

TEST_CASE("evaluation is deterministic") {
  const auto c = fixtures::reference_crystal();
  CHECK(group_index(1.55e-6, 320.0, c) == group_index(1.55e-6, 320.0, c));
}
