#pragma once

#include <vector>

#include "opo/dispersion.hpp"

namespace opo {

struct PumpSpec {
  double frequency_hz = 0.0;
  double power_w = 0.0;

  static PumpSpec from_wavelength(double wavelength_m, double power_w);
  double wavelength_m() const;
  void validate() const;
};

/// A signal/idler frequency pair. The only way to build one is from the pump and the signal
/// frequency, so nu_s + nu_i = nu_p holds for every instance.
class PhotonPair {
public:
  static PhotonPair from_signal(const PumpSpec& pump, double signal_hz);

  double signal_hz() const { return signal_; }
  double idler_hz() const { return idler_; }
  double pump_hz() const { return pump_; }

private:
  PhotonPair(double pump, double signal) : pump_(pump), signal_(signal), idler_(pump - signal) {}
  double pump_;
  double signal_;
  double idler_;
};

/// Poling period at `temperature_k`, thermally expanded with the crystal.
double poling_period_at(const CrystalSpec& crystal, double temperature_k);

/// dk = k(nu_p) - k(nu_s) - k(nu_p - nu_s) - 2 pi / Lambda(T), rad/m.
double qpm_mismatch(const PumpSpec& pump, double signal_hz, double temperature_k, const CrystalSpec& crystal);

/// sinc^2(dk L / 2), with L the expanded crystal length.
double pm_envelope(const PumpSpec& pump, double signal_hz, double temperature_k, const CrystalSpec& crystal);

/// c / (nu_p / 2).
double degenerate_wavelength(const PumpSpec& pump);

struct PhasematchResult {
  double temperature_k = 0.0;
  double residual = 0.0; ///< |dk| at degeneracy, rad/m
  bool phase_matched = false; ///< false: no sign change in the window, temperature is the nearest approach
};

/// Temperature at which the degenerate process is phase matched.
PhasematchResult phasematch_temperature(const PumpSpec& pump, const CrystalSpec& crystal);

struct TuningOptions {
  double grid_step_m = 10e-12;           ///< coarse wavelength grid before golden-section refinement
  double max_signal_wavelength_m = 3e-6; ///< search limit on the long-wavelength branch
};

struct TuningPoint {
  double temperature_k = 0.0;
  double signal_peak_m = 0.0; ///< long-wavelength envelope maximum
  double idler_peak_m = 0.0;  ///< short-wavelength envelope maximum
  double separation_m() const { return signal_peak_m - idler_peak_m; }
};

/// Envelope maxima on each side of degeneracy for T = t_lo, t_lo + step, ..., <= t_hi.
std::vector<TuningPoint> tuning_curve(const PumpSpec& pump, const CrystalSpec& crystal, double t_lo_k, double t_hi_k,
                                      double step_k, const TuningOptions& options = {});

} // namespace opo
