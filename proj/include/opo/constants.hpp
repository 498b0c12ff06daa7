#pragma once

#include <numbers>

namespace opo {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kZeroCelsius = 273.15; // K

inline constexpr double celsius_to_kelvin(double celsius) { return celsius + kZeroCelsius; }
inline constexpr double kelvin_to_celsius(double kelvin) { return kelvin - kZeroCelsius; }

/// Vacuum wavelength <-> optical frequency.
inline constexpr double wavelength_to_frequency(double wavelength_m) { return kSpeedOfLight / wavelength_m; }
inline constexpr double frequency_to_wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

/// Converts a frequency interval at wavelength `wavelength_m` into a wavelength interval.
inline constexpr double frequency_span_to_wavelength(double span_hz, double wavelength_m) {
  return wavelength_m * wavelength_m * span_hz / kSpeedOfLight;
}

} // namespace opo
