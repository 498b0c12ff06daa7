#pragma once

#include <string>

namespace opo {

/// Coefficients of a temperature-dependent extraordinary-index Sellmeier series of the form
///
///   n^2 = a1 + b1 f + (a2 + b2 f) / (l^2 - (a3 + b3 f)^2) + (a4 + b4 f) / (l^2 - a5^2) - a6 l^2
///   f   = (T - f_ref) (T + f_offset)
///
/// with l the vacuum wavelength in micrometres and T in degrees Celsius. Setting everything but
/// a1 to zero gives a dispersionless medium with n = sqrt(a1).
struct SellmeierCoefficients {
  std::string label;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0, a6 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
  double f_ref_c = 24.5;
  double f_offset_c = 570.82;

  /// 5 mol% MgO-doped congruent LiNbO3, extraordinary ray (Gayer et al., Appl. Phys. B 91, 343 (2008)).
  static SellmeierCoefficients mgo_cln_extraordinary();
  /// Constant index, no temperature dependence.
  static SellmeierCoefficients constant(double index);
};

struct ValidityWindow {
  double wavelength_min_m = 0.5e-6;
  double wavelength_max_m = 4.0e-6;
  double temperature_min_k = 293.15;
  double temperature_max_k = 473.15;
};

struct CrystalSpec {
  double length_m = 0.0;
  double poling_period_m = 0.0;
  double transmission = 1.0; ///< single-pass power transmission
  SellmeierCoefficients dispersion;
  double thermal_expansion_per_k = 0.0;
  ValidityWindow window;

  /// Throws DomainError if a type invariant is violated.
  void validate() const;
};

/// Reference temperature for thermal expansion (25 C).
inline constexpr double kExpansionReferenceK = 298.15;

/// Length scaling factor 1 + alpha (T - 25 C) of the crystal.
double expansion_factor(const CrystalSpec& crystal, double temperature_k);

/// Throws DomainError naming the violated bound when (wavelength, temperature) is outside the window.
void check_window(const CrystalSpec& crystal, double wavelength_m, double temperature_k);

double refractive_index(double wavelength_m, double temperature_k, const CrystalSpec& crystal);

/// n - lambda dn/dlambda, with dn/dlambda from a central difference of relative step 1e-5.
double group_index(double wavelength_m, double temperature_k, const CrystalSpec& crystal);

/// k = 2 pi n(c/nu) nu / c, in rad/m.
double wavevector(double frequency_hz, double temperature_k, const CrystalSpec& crystal);

inline constexpr double kDerivativeRelativeStep = 1e-5;

} // namespace opo
