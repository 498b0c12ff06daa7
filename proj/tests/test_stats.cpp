#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/stats.hpp"

using namespace opo;

TEST_CASE("pair rate arithmetic") {
  const Brightness b{134.0};
  CHECK(pair_rate(b, 40e-3, 116e6) == doctest::Approx(6.2176e5).epsilon(1e-12));
  CHECK(pair_rate(b, 0.0, 116e6) == 0.0);
  CHECK(pair_rate(b, 80e-3, 116e6) == 2.0 * pair_rate(b, 40e-3, 116e6));
  // unit invariance: 40 mW, 116 MHz expressed through different prefixes
  CHECK(pair_rate(b, 0.04, 0.116e9) == doctest::Approx(pair_rate(b, 40e-3, 116e6)).epsilon(1e-15));
  CHECK_THROWS_AS(pair_rate(b, -1.0, 116e6), DomainError);
}

TEST_CASE("pairs per mode") {
  const double mu = pairs_per_mode(6.2176e5, 8.6e-9);
  CHECK(mu == doctest::Approx(5.35e-3).epsilon(0.005));
  CHECK(mu == doctest::Approx(5e-3).epsilon(0.15));
  CHECK(pairs_per_mode(0.0, 8.6e-9) == 0.0);
  CHECK(pairs_per_mode(2 * 6.2e5, 4.3e-9) == doctest::Approx(pairs_per_mode(6.2e5, 8.6e-9)).epsilon(1e-15));
  const auto r = rate_report(Brightness{134.0}, 40e-3, 116e6, 500.0);
  CHECK(r.pair_rate_hz == doctest::Approx(6.2176e5));
  CHECK(r.coherence_time_s == doctest::Approx(1.0 / 116e6));
  CHECK(r.pairs_per_mode == doctest::Approx(r.pair_rate_hz / 116e6));
  CHECK(r.enhancement_factor_reported == 500.0);
}

TEST_CASE("thermal g2 and its inverse") {
  CHECK(thermal_g2(1.0) == 2.0);
  CHECK(thermal_g2(1.19) == doctest::Approx(1.84).epsilon(0.001));
  CHECK(thermal_g2(1e12) == doctest::Approx(1.0).epsilon(1e-11));
  for (double g : {1.001, 1.2, 1.5, 1.84, 2.0}) CHECK(thermal_g2(modes_from_g2(g)) == doctest::Approx(g).epsilon(1e-14));
  for (double n : {1.0, 1.19, 3.0, 50.0}) CHECK(modes_from_g2(thermal_g2(n)) == doctest::Approx(n).epsilon(1e-12));
  CHECK_THROWS_AS(modes_from_g2(1.0), DomainError);
  CHECK_THROWS_AS(modes_from_g2(2.1), DomainError);
  CHECK_THROWS_AS(thermal_g2(0.5), DomainError);
}

TEST_CASE("delta-method error on the mode number") {
  const auto n = modes_from_g2(Estimate{1.84, 0.11});
  CHECK(n.value == doctest::Approx(1.19).epsilon(0.005 / 1.19));
  CHECK(n.sigma == doctest::Approx(0.11 / (0.84 * 0.84)).epsilon(1e-12));
  CHECK(n.sigma == doctest::Approx(0.15).epsilon(0.01 / 0.15));
}

TEST_CASE("matched Gaussian filter loses 1/sqrt(2)") {
  const Lineshape filter{LineshapeKind::gaussian, 194e12, 116e6, 1.0};
  const Lineshape photon{LineshapeKind::gaussian, 194e12, 116e6, 1.0};
  CHECK(std::abs(filter_transmission(filter, photon) - 1.0 / std::sqrt(2.0)) < 1e-6);
  const Lineshape offset{LineshapeKind::gaussian, 194e12 + 50e6, 116e6, 1.0};
  // Product of Gaussians: transmission reduced by exp(-4 ln2 d^2 / (2 w^2)).
  const double expected = std::exp(-4.0 * std::log(2.0) * 50e6 * 50e6 / (2.0 * 116e6 * 116e6)) / std::sqrt(2.0);
  CHECK(filter_transmission(offset, photon) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("top-hat channel on a Lorentzian photon") {
  const Lineshape filter{LineshapeKind::top_hat, 194e12, 24.6e9, 1.0};
  const Lineshape photon{LineshapeKind::lorentzian, 194e12, 116e6, 1.0};
  const double t = filter_transmission(filter, photon);
  CHECK(t >= 0.993);
  CHECK(t == doctest::Approx(2.0 / kPi * std::atan(24.6e9 / 116e6)).epsilon(1e-9));
  const Lineshape wide{LineshapeKind::unbounded, 0.0, 0.0, 1.0};
  CHECK(filter_transmission(wide, photon) == 1.0);
  CHECK(filter_transmission(wide, Lineshape{LineshapeKind::gaussian, 194e12, 1e9, 1.0}) == 1.0);
}

TEST_CASE("nested filters transmit monotonically") {
  const Lineshape photon{LineshapeKind::lorentzian, 194e12, 116e6, 1.0};
  for (auto kind : {LineshapeKind::gaussian, LineshapeKind::top_hat, LineshapeKind::lorentzian}) {
    double prev = 0.0;
    for (double w : {10e6, 50e6, 116e6, 500e6, 5e9, 50e9}) {
      const double t = filter_transmission(Lineshape{kind, 194e12, w, 0.9}, photon);
      CHECK(t >= prev);
      CHECK(t <= 0.9 + 1e-12);
      prev = t;
    }
  }
}

TEST_CASE("coincidence profile") {
  const double df = 116e6;
  CHECK(coincidence_profile(df, 1.0 / (2 * kPi * df)) / coincidence_profile(df, 0.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(1.0 / (2 * kPi * df) == doctest::Approx(1.372e-9).epsilon(1e-3));
  CHECK(coincidence_profile(df, 3e-9) == coincidence_profile(df, -3e-9));
  // integrate in units of the coherence time so the quadrature sees an O(1) scale
  const double area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) { return coincidence_profile(df, u / df) / df; }, -std::numeric_limits<double>::infinity(),
      std::numeric_limits<double>::infinity(), 15, 1e-13);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-9));
}
