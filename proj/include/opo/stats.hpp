#pragma once

namespace opo {

/// Source brightness unit: pairs per (second * milliwatt * megahertz).
struct Brightness {
  double pairs_per_s_mw_mhz = 0.0;
};

struct RateReport {
  double brightness = 0.0;      ///< pairs / (s mW MHz)
  double pair_rate_hz = 0.0;
  double pairs_per_mode = 0.0;  ///< pair_rate * coherence_time
  double coherence_time_s = 0.0;
  double enhancement_factor_reported = 0.0; ///< echoed from configuration, never computed
};

/// R = brightness * P * df, with P in watts and df in hertz.
double pair_rate(Brightness brightness, double pump_power_w, double bandwidth_hz);

/// mu = R tau.
double pairs_per_mode(double pair_rate_hz, double coherence_time_s);

RateReport rate_report(Brightness brightness, double pump_power_w, double bandwidth_hz,
                       double enhancement_factor_reported);

/// g2(0) = 1 + 1/N for N equally populated thermal modes.
double thermal_g2(double modes);
/// Inverse of thermal_g2; requires 1 < g2 <= 2.
double modes_from_g2(double g2);

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Delta-method propagation: sigma_N = sigma_g2 / (g2 - 1)^2.
Estimate modes_from_g2(Estimate g2);

enum class LineshapeKind { gaussian, lorentzian, top_hat, unbounded };

/// A spectral line or filter passband. For filters `peak` is the peak power transmission; for
/// photons it is ignored (the photon density is always unit-normalized).
struct Lineshape {
  LineshapeKind kind = LineshapeKind::gaussian;
  double center_hz = 0.0;
  double fwhm_hz = 0.0; ///< full width for top_hat
  double peak = 1.0;

  /// Filter transmission at frequency nu.
  double transmission(double frequency_hz) const;
  /// Unit-normalized spectral density at nu.
  double density(double frequency_hz) const;
};

/// Integral of filter(nu) * photon_density(nu) over all frequencies.
double filter_transmission(const Lineshape& filter, const Lineshape& photon);

/// Two-sided exponential (pi df) exp(-2 pi df |T|), unit area over T.
double coincidence_profile(double bandwidth_hz, double delay_s);

} // namespace opo
