#include "opo/spdc.hpp"

#include <algorithm>
#include <cmath>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/numeric.hpp"

namespace opo {

PumpSpec PumpSpec::from_wavelength(double wavelength_m, double power_w) {
  if (!(wavelength_m > 0.0)) throw DomainError("pump wavelength must be positive");
  return PumpSpec{wavelength_to_frequency(wavelength_m), power_w};
}

double PumpSpec::wavelength_m() const { return frequency_to_wavelength(frequency_hz); }

void PumpSpec::validate() const {
  if (!(frequency_hz > 0.0)) throw DomainError("pump frequency must be positive");
  if (!(power_w >= 0.0)) throw DomainError("pump power must be non-negative");
}

PhotonPair PhotonPair::from_signal(const PumpSpec& pump, double signal_hz) {
  if (!(signal_hz > 0.0 && signal_hz < pump.frequency_hz)) {
    throw DomainError("signal frequency must lie strictly between 0 and the pump frequency");
  }
  return PhotonPair(pump.frequency_hz, signal_hz);
}

double poling_period_at(const CrystalSpec& crystal, double temperature_k) {
  return crystal.poling_period_m * expansion_factor(crystal, temperature_k);
}

double qpm_mismatch(const PumpSpec& pump, double signal_hz, double temperature_k, const CrystalSpec& crystal) {
  pump.validate();
  const auto pair = PhotonPair::from_signal(pump, signal_hz);
  // daughters summed smaller first
  const double ks = wavevector(pair.signal_hz(), temperature_k, crystal);
  const double ki = wavevector(pair.idler_hz(), temperature_k, crystal);
  const double daughters = std::min(ks, ki) + std::max(ks, ki);
  return wavevector(pump.frequency_hz, temperature_k, crystal) - daughters -
         2.0 * kPi / poling_period_at(crystal, temperature_k);
}

namespace {

double sinc_squared(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

} // namespace

double pm_envelope(const PumpSpec& pump, double signal_hz, double temperature_k, const CrystalSpec& crystal) {
  const double dk = qpm_mismatch(pump, signal_hz, temperature_k, crystal);
  const double length = crystal.length_m * expansion_factor(crystal, temperature_k);
  return sinc_squared(0.5 * dk * length);
}

double degenerate_wavelength(const PumpSpec& pump) {
  pump.validate();
  return kSpeedOfLight / (0.5 * pump.frequency_hz);
}

PhasematchResult phasematch_temperature(const PumpSpec& pump, const CrystalSpec& crystal) {
  const double degenerate = 0.5 * pump.frequency_hz;
  auto mismatch = [&](double t) { return qpm_mismatch(pump, degenerate, t, crystal); };

  const double t_min = crystal.window.temperature_min_k;
  const double t_max = crystal.window.temperature_max_k;
  const int steps = std::max(1, static_cast<int>(std::ceil(t_max - t_min))); // ~1 K coarse grid
  const double h = (t_max - t_min) / steps;

  double best_t = t_min;
  double best_abs = std::abs(mismatch(t_min));
  double previous = mismatch(t_min);
  for (int i = 1; i <= steps; ++i) {
    const double t = t_min + i * h;
    const double value = mismatch(t);
    if (value == 0.0 || (value > 0.0) != (previous > 0.0)) {
      const double root = numeric::find_root(mismatch, t - h, t);
      return {root, std::abs(mismatch(root)), true};
    }
    if (std::abs(value) < best_abs) {
      best_abs = std::abs(value);
      best_t = t;
    }
    previous = value;
  }
  // No crossing: report the nearest approach.
  const double lo = std::max(t_min, best_t - h);
  const double hi = std::min(t_max, best_t + h);
  const double t = numeric::golden_section_minimize([&](double x) { return std::abs(mismatch(x)); }, lo, hi, 1e-9);
  return {t, std::abs(mismatch(t)), false};
}

namespace {

/// Maximizer of the envelope over signal wavelengths in [lo, hi].
double envelope_peak(const PumpSpec& pump, const CrystalSpec& crystal, double temperature_k, double lo_m, double hi_m,
                     double step_m, double degenerate_m) {
  auto at = [&](double wavelength) {
    const double nu = wavelength_to_frequency(wavelength);
    return std::pair{pm_envelope(pump, nu, temperature_k, crystal),
                     std::abs(qpm_mismatch(pump, nu, temperature_k, crystal))};
  };
  const auto count = static_cast<std::size_t>(std::floor((hi_m - lo_m) / step_m));
  std::size_t best = 0;
  auto best_value = at(lo_m);
  for (std::size_t i = 1; i <= count + 1; ++i) {
    const double wavelength = std::min(hi_m, lo_m + static_cast<double>(i) * step_m);
    const auto value = at(wavelength);
    if (value.first > best_value.first || (value.first == best_value.first && value.second < best_value.second)) {
      best_value = value;
      best = i;
    }
  }
  const double center = std::min(hi_m, lo_m + static_cast<double>(best) * step_m);
  const double a = std::max(lo_m, center - step_m);
  const double b = std::min(hi_m, center + step_m);
  auto signed_mismatch = [&](double wavelength) {
    return qpm_mismatch(pump, wavelength_to_frequency(wavelength), temperature_k, crystal);
  };
  const double fa = signed_mismatch(a);
  const double fb = signed_mismatch(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) != (fb < 0.0)) return numeric::find_root(signed_mismatch, a, b);
  // No phase-matched point nearby: a peak pinned to degeneracy stays there exactly.
  if (center == degenerate_m) return degenerate_m;
  return numeric::golden_section_minimize([&](double w) { return at(w).second; }, a, b, 1e-15);
}

} // namespace

std::vector<TuningPoint> tuning_curve(const PumpSpec& pump, const CrystalSpec& crystal, double t_lo_k, double t_hi_k,
                                      double step_k, const TuningOptions& options) {
  pump.validate();
  if (!(step_k > 0.0) || !(t_lo_k <= t_hi_k)) throw DomainError("tuning_curve: invalid temperature range");
  if (t_lo_k < crystal.window.temperature_min_k || t_hi_k > crystal.window.temperature_max_k) {
    throw DomainError("tuning_curve: temperature range outside the dispersion window");
  }
  const double degenerate = degenerate_wavelength(pump);
  const double long_limit = options.max_signal_wavelength_m;
  if (!(long_limit > degenerate)) throw DomainError("tuning_curve: search limit must exceed the degenerate wavelength");
  const double short_limit = 1.0 / (1.0 / pump.wavelength_m() - 1.0 / long_limit);

  std::vector<TuningPoint> curve;
  const auto count = static_cast<std::size_t>(std::floor((t_hi_k - t_lo_k) / step_k + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) {
    const double t = t_lo_k + static_cast<double>(i) * step_k;
    TuningPoint point;
    point.temperature_k = t;
    point.signal_peak_m = envelope_peak(pump, crystal, t, degenerate, long_limit, options.grid_step_m, degenerate);
    point.idler_peak_m = envelope_peak(pump, crystal, t, short_limit, degenerate, options.grid_step_m, degenerate);
    curve.push_back(point);
  }
  return curve;
}

} // namespace opo
