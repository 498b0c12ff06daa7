#include "opo/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "opo/constants.hpp"
#include "opo/errors.hpp"

namespace opo {

SellmeierCoefficients SellmeierCoefficients::mgo_cln_extraordinary() {
  SellmeierCoefficients c;
  c.label = "MgO(5%):CLN extraordinary, Gayer 2008";
  c.a1 = 5.756;
  c.a2 = 0.0983;
  c.a3 = 0.2020;
  c.a4 = 189.32;
  c.a5 = 12.52;
  c.a6 = 1.32e-2;
  c.b1 = 2.860e-6;
  c.b2 = 4.700e-8;
  c.b3 = 6.113e-8;
  c.b4 = 1.516e-4;
  return c;
}

SellmeierCoefficients SellmeierCoefficients::constant(double index) {
  SellmeierCoefficients c;
  c.label = "constant index";
  c.a1 = index * index;
  return c;
}

void CrystalSpec::validate() const {
  if (!(length_m >= 0.0)) throw DomainError("crystal length must be >= 0");
  if (!(poling_period_m > 0.0)) throw DomainError("poling period must be > 0");
  if (!(transmission > 0.0 && transmission <= 1.0)) throw DomainError("crystal transmission must lie in (0, 1]");
  if (!(window.wavelength_min_m > 0.0 && window.wavelength_min_m < window.wavelength_max_m)) {
    throw DomainError("invalid wavelength validity window");
  }
  if (!(window.temperature_min_k > 0.0 && window.temperature_min_k <= window.temperature_max_k)) {
    throw DomainError("invalid temperature validity window");
  }
}

double expansion_factor(const CrystalSpec& crystal, double temperature_k) {
  return 1.0 + crystal.thermal_expansion_per_k * (temperature_k - kExpansionReferenceK);
}

void check_window(const CrystalSpec& crystal, double wavelength_m, double temperature_k) {
  const auto& w = crystal.window;
  auto fail = [](const char* what, double value, double bound) {
    std::ostringstream os;
    os.precision(10);
    os << what << " (value " << value << ", bound " << bound << ")";
    throw DomainError(os.str());
  };
  if (!std::isfinite(wavelength_m) || wavelength_m < w.wavelength_min_m) {
    fail("wavelength below dispersion window minimum [m]", wavelength_m, w.wavelength_min_m);
  }
  if (wavelength_m > w.wavelength_max_m) {
    fail("wavelength above dispersion window maximum [m]", wavelength_m, w.wavelength_max_m);
  }
  if (!std::isfinite(temperature_k) || temperature_k < w.temperature_min_k) {
    fail("temperature below dispersion window minimum [K]", temperature_k, w.temperature_min_k);
  }
  if (temperature_k > w.temperature_max_k) {
    fail("temperature above dispersion window maximum [K]", temperature_k, w.temperature_max_k);
  }
}

namespace {

double index_unchecked(double wavelength_m, double temperature_k, const SellmeierCoefficients& c) {
  const double l = wavelength_m * 1e6;
  const double l2 = l * l;
  const double t = kelvin_to_celsius(temperature_k);
  const double f = (t - c.f_ref_c) * (t + c.f_offset_c);
  const double uv_pole = c.a3 + c.b3 * f;
  double n2 = c.a1 + c.b1 * f - c.a6 * l2;
  if (c.a2 != 0.0 || c.b2 != 0.0) n2 += (c.a2 + c.b2 * f) / (l2 - uv_pole * uv_pole);
  if (c.a4 != 0.0 || c.b4 != 0.0) n2 += (c.a4 + c.b4 * f) / (l2 - c.a5 * c.a5);
  return std::sqrt(n2);
}

} // namespace

double refractive_index(double wavelength_m, double temperature_k, const CrystalSpec& crystal) {
  check_window(crystal, wavelength_m, temperature_k);
  const double n = index_unchecked(wavelength_m, temperature_k, crystal.dispersion);
  if (!(n > 1.0) || !std::isfinite(n)) {
    throw DomainError("dispersion series '" + crystal.dispersion.label + "' yields a non-physical index");
  }
  return n;
}

double group_index(double wavelength_m, double temperature_k, const CrystalSpec& crystal) {
  const double h = wavelength_m * kDerivativeRelativeStep;
  check_window(crystal, wavelength_m - h, temperature_k);
  check_window(crystal, wavelength_m + h, temperature_k);
  const double n = refractive_index(wavelength_m, temperature_k, crystal);
  const double dn = (index_unchecked(wavelength_m + h, temperature_k, crystal.dispersion) -
                     index_unchecked(wavelength_m - h, temperature_k, crystal.dispersion)) /
                    (2.0 * h);
  return n - wavelength_m * dn;
}

double wavevector(double frequency_hz, double temperature_k, const CrystalSpec& crystal) {
  if (!(frequency_hz > 0.0)) throw DomainError("wavevector: frequency must be positive");
  const double n = refractive_index(frequency_to_wavelength(frequency_hz), temperature_k, crystal);
  return 2.0 * kPi * n * frequency_hz / kSpeedOfLight;
}

} // namespace opo
