#pragma once

#include <string>

#include "opo/cavity.hpp"
#include "opo/constants.hpp"
#include "opo/dispersion.hpp"
#include "opo/spdc.hpp"

namespace fixtures {

inline constexpr double kPumpWavelength = 780.24e-9;
inline constexpr double kOperatingCelsius = 43.77;
inline constexpr double kPolingPeriod = 19.6132e-6;

inline opo::CrystalSpec reference_crystal() {
  opo::CrystalSpec c;
  c.length_m = 1.0e-3;
  c.poling_period_m = kPolingPeriod;
  c.transmission = 0.997;
  c.dispersion = opo::SellmeierCoefficients::mgo_cln_extraordinary();
  c.thermal_expansion_per_k = 1.54e-5;
  return c;
}

/// Two-mirror source of the shipped configuration.
inline opo::SourceSpec reference_source() {
  opo::SourceSpec s;
  s.crystal = reference_crystal();
  s.flat_mirror = {0.985, opo::MirrorGeometry::flat, 0.0};
  s.concave_mirror = {0.995, opo::MirrorGeometry::concave, 12e-3};
  s.physical_length_m = 3.900176e-3;
  s.pump_wavelength_m = kPumpWavelength;
  s.pump_power_w = 40e-3;
  s.temperature_k = opo::celsius_to_kelvin(kOperatingCelsius);
  return s;
}

/// Same geometry with a dispersionless crystal of index n.
inline opo::SourceSpec flat_index_source(double n) {
  auto s = reference_source();
  s.crystal.dispersion = opo::SellmeierCoefficients::constant(n);
  s.crystal.thermal_expansion_per_k = 0.0;
  return s;
}

inline opo::PumpSpec reference_pump() { return opo::PumpSpec::from_wavelength(kPumpWavelength, 40e-3); }

inline std::string config_path() { return std::string(OPO_CONFIG_DIR) + "/paper.cfg"; }

} // namespace fixtures
