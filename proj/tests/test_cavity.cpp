#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "opo/errors.hpp"

using namespace opo;

namespace {

constexpr double kLambda = 1560.48e-9;

struct Abcd {
  double a, b, c, d;
  Abcd operator*(const Abcd& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

Abcd translation(double length, double index = 1.0) { return {1.0, length / index, 0.0, 1.0}; }
Abcd curved_mirror(double roc) { return {1.0, 0.0, -2.0 / roc, 1.0}; }

/// Waist at the flat mirror from the self-consistent round-trip beam parameter.
double abcd_waist(const SourceSpec& src, double lambda) {
  const double lc = crystal_length_at(src);
  const double n = refractive_index(lambda, src.temperature_k, src.crystal);
  const double air = physical_length_at(src) - lc;
  const Abcd one_way = translation(air) * translation(lc, n);
  const Abcd back = translation(lc, n) * translation(air);
  const Abcd m = back * curved_mirror(src.concave_mirror.radius_of_curvature_m()) * one_way;
  // C q^2 + (D - A) q - B = 0
  const std::complex<double> disc = std::sqrt(std::complex<double>((m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c));
  std::complex<double> q = (-(m.d - m.a) + disc) / (2.0 * m.c);
  if ((1.0 / q).imag() > 0.0) q = (-(m.d - m.a) - disc) / (2.0 * m.c);
  const double inv_im = (1.0 / q).imag();
  return std::sqrt(-lambda / (kPi * inv_im));
}

/// Numerical FWHM of the transmission peak nearest `center`.
double scan_fwhm(const SourceSpec& src, double center, double span, double step) {
  const auto s = transmission_scan(src, center - span, center + span, step);
  const auto peak = std::max_element(s.begin(), s.end(), [](auto& x, auto& y) { return x.transmission < y.transmission; });
  const double half = 0.5 * peak->transmission;
  auto cross = [&](auto it, int dir) {
    while (it->transmission > half) it += dir;
    const auto in = it - dir;
    const double frac = (in->transmission - half) / (in->transmission - it->transmission);
    return in->frequency_hz + frac * (it->frequency_hz - in->frequency_hz);
  };
  return cross(peak, +1) - cross(peak, -1);
}

} // namespace

TEST_CASE("optical length") {
  auto src = fixtures::reference_source();
  auto empty = src;
  empty.crystal.length_m = 0.0;
  CHECK(optical_length(empty, kLambda, IndexKind::phase) == empty.physical_length_m);

  auto nominal = src;
  nominal.physical_length_m = 3.9e-3;
  nominal.crystal.thermal_expansion_per_k = 0.0;
  CHECK(optical_length(nominal, kLambda, IndexKind::phase) == doctest::Approx(5.04e-3).epsilon(0.005));
}

TEST_CASE("free spectral range") {
  const auto src = fixtures::reference_source();
  const double f = fsr(src, kLambda);
  CHECK(f == doctest::Approx(29.7e9).epsilon(1.0 / 29.7));
  CHECK(f * 2.0 * optical_length(src, kLambda, IndexKind::group) / kSpeedOfLight == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(frequency_span_to_wavelength(f, kLambda) == doctest::Approx(0.24e-9).epsilon(0.01 / 0.24));

  auto empty = src;
  empty.crystal.length_m = 0.0;
  empty.physical_length_m = 1.0;
  CHECK(fsr(empty, kLambda) == doctest::Approx(149.896229e6).epsilon(1e-9));
}

TEST_CASE("finesse and linewidth chain") {
  const auto src = fixtures::reference_source();
  const double fin = finesse(src);
  CHECK(fin == doctest::Approx(243.0).epsilon(0.03));
  CHECK(fin == doctest::Approx(240.409).epsilon(1e-5));
  CHECK(linewidth(src, kLambda) * fin == doctest::Approx(fsr(src, kLambda)).epsilon(1e-12));
  CHECK(coherence_time(linewidth(src, kLambda)) * linewidth(src, kLambda) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(coherence_time(1.0) == 1.0);
  CHECK(coherence_time(116e6) == doctest::Approx(8.6e-9).epsilon(0.005));
  CHECK(coherence_time(122e6) == doctest::Approx(8.2e-9).epsilon(0.005));
  CHECK(29.7e9 / 255.0 == doctest::Approx(116e6).epsilon(1.0 / 116));
  CHECK(29.7e9 / 243.0 == doctest::Approx(122e6).epsilon(0.5 / 122));
}

TEST_CASE("finesse diverges as losses vanish") {
  auto src = fixtures::reference_source();
  double prev = 0.0;
  for (double eps : {1e-2, 3e-3, 1e-3, 1e-4, 1e-5}) {
    src.flat_mirror.reflectivity = src.concave_mirror.reflectivity = src.crystal.transmission = 1.0 - eps;
    const double f = finesse(src);
    CHECK(f > prev);
    prev = f;
  }
  src.flat_mirror.reflectivity = src.concave_mirror.reflectivity = src.crystal.transmission = 1.0;
  CHECK_THROWS_AS(finesse(src), DomainError);
}

TEST_CASE("finesse matches the numerical Airy FWHM") {
  const auto src = fixtures::reference_source();
  const auto comb = resonance_comb(src, wavelength_to_frequency(1561e-9), wavelength_to_frequency(1560e-9));
  const auto& mode = comb.modes[comb.modes.size() / 2];
  const double fwhm = scan_fwhm(src, mode.frequency_hz, 0.5 * mode.fsr_hz, mode.linewidth_hz / 200.0);
  CHECK(mode.fsr_hz / fwhm == doctest::Approx(finesse(src)).epsilon(0.01));
}

TEST_CASE("linewidth scales inversely with finesse") {
  auto a = fixtures::reference_source();
  auto b = a;
  b.flat_mirror.reflectivity = 0.999;
  const double ratio = finesse(b) / finesse(a);
  CHECK(linewidth(b, kLambda) * ratio == doctest::Approx(linewidth(a, kLambda)).epsilon(1e-14));
}

TEST_CASE("mode waist") {
  const auto src = fixtures::reference_source();
  const double w = mode_waist(src, kLambda);
  CHECK(w == doctest::Approx(65e-6).epsilon(3.0 / 65.0));
  CHECK(w == doctest::Approx(abcd_waist(src, kLambda)).epsilon(0.005));

  auto shorter = src;
  for (double l : {3.0e-3, 2.0e-3, 1.2e-3}) {
    shorter.physical_length_m = l;
    CHECK(mode_waist(shorter, kLambda) == doctest::Approx(abcd_waist(shorter, kLambda)).epsilon(0.005));
  }
  auto tiny = src;
  tiny.crystal.length_m = 0.0;
  tiny.physical_length_m = 1e-12;
  CHECK(mode_waist(tiny, kLambda) < 1e-6);
}

TEST_CASE("escape probability") {
  auto src = fixtures::reference_source();
  CHECK(escape_probability(src) == doctest::Approx(0.58).epsilon(0.01));
  src.concave_mirror.reflectivity = 1.0;
  src.crystal.transmission = 1.0;
  CHECK(escape_probability(src) == 1.0);
  src.concave_mirror.reflectivity = src.flat_mirror.reflectivity;
  CHECK(escape_probability(src) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("resonance comb") {
  const auto src = fixtures::reference_source();
  const auto comb = resonance_comb(src, wavelength_to_frequency(1562e-9), wavelength_to_frequency(1559e-9));
  REQUIRE(comb.modes.size() >= 10);
  for (std::size_t i = 0; i < comb.modes.size(); ++i) {
    const auto& m = comb.modes[i];
    CHECK(std::abs(round_trip_order(src, m.frequency_hz) - static_cast<double>(m.mode_index)) /
              static_cast<double>(m.mode_index) <
          1e-9);
    if (i > 0) {
      CHECK(m.frequency_hz > comb.modes[i - 1].frequency_hz);
      CHECK(m.mode_index == comb.modes[i - 1].mode_index + 1);
      const double dl = frequency_to_wavelength(comb.modes[i - 1].frequency_hz) - frequency_to_wavelength(m.frequency_hz);
      CHECK(dl == doctest::Approx(0.24e-9).epsilon(0.01 / 0.24));
    }
  }
}

TEST_CASE("dispersionless comb is uniform") {
  const auto src = fixtures::flat_index_source(2.2);
  const auto comb = resonance_comb(src, wavelength_to_frequency(1570e-9), wavelength_to_frequency(1550e-9));
  const double spacing = kSpeedOfLight / (2.0 * optical_length(src, kLambda, IndexKind::phase));
  for (std::size_t i = 1; i < comb.modes.size(); ++i) {
    CHECK(comb.modes[i].frequency_hz - comb.modes[i - 1].frequency_hz == doctest::Approx(spacing).epsilon(1e-9));
  }
  CHECK(comb.modes.front().frequency_hz == doctest::Approx(spacing * comb.modes.front().mode_index).epsilon(1e-12));
}

TEST_CASE("transmission scan peaks sit on the comb") {
  const auto src = fixtures::reference_source();
  const double lo = wavelength_to_frequency(1561.2e-9);
  const double hi = wavelength_to_frequency(1559.7e-9);
  const double step = linewidth(src, kLambda) / 8.0;
  const auto scan = transmission_scan(src, lo, hi, step);
  const auto comb = resonance_comb(src, lo, hi);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < scan.size(); ++i) {
    if (scan[i].transmission > scan[i - 1].transmission && scan[i].transmission >= scan[i + 1].transmission &&
        scan[i].transmission > 0.5 * peak_transmission(src)) {
      peaks.push_back(scan[i].frequency_hz);
    }
  }
  const double span_fsr = (hi - lo) / fsr(src, kLambda);
  CHECK(std::abs(static_cast<double>(peaks.size()) - std::floor(span_fsr)) <= 1.0);
  REQUIRE(peaks.size() == comb.modes.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) CHECK(std::abs(peaks[i] - comb.modes[i].frequency_hz) <= step);
  CHECK_THROWS_AS(transmission_scan(src, lo, hi, linewidth(src, kLambda)), DomainError);
}

TEST_CASE("FWHM shrinks as the round trip approaches lossless") {
  auto src = fixtures::reference_source();
  double prev = 1e300;
  for (double r : {0.98, 0.99, 0.995, 0.999}) {
    src.flat_mirror.reflectivity = r;
    const double w = linewidth(src, kLambda);
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("Gouy phase shifts mode positions only when enabled") {
  auto src = fixtures::reference_source();
  CHECK(gouy_phase(src, kLambda) == 0.0);
  src.gouy_phase = true;
  const double g = gouy_phase(src, kLambda);
  CHECK(g > 0.0);
  CHECK(g < kPi);
  auto off = src;
  off.gouy_phase = false;
  const double nu = wavelength_to_frequency(kLambda);
  CHECK(round_trip_order(off, nu) - round_trip_order(src, nu) == doctest::Approx(g / (2 * kPi)).epsilon(1e-9));
}

TEST_CASE("source validation") {
  auto src = fixtures::reference_source();
  CHECK_NOTHROW(src.validate());
  src.physical_length_m = 0.5e-3;
  CHECK_THROWS_AS(src.validate(), DomainError);
  src = fixtures::reference_source();
  src.flat_mirror.reflectivity = 1.2;
  CHECK_THROWS_AS(src.validate(), DomainError);
}
