#pragma once

#include <optional>
#include <vector>

#include "opo/cavity.hpp"
#include "opo/spdc.hpp"

namespace opo {

/// How double resonance is scored.
enum class Acceptance {
  lorentzian, ///< weight pm * 1 / (1 + (2 d / df)^2)
  hard,       ///< weight pm when |d| < df / 2, else 0
};

struct ClusterOptions {
  Acceptance acceptance = Acceptance::lorentzian;
  /// A (signal mode, idler mode) pair is listed as contributing when |nu_s + nu_i(mode) - nu_p| < window * df.
  double pair_window_linewidths = 1.0;
};

struct ModePair {
  long signal_mode = 0;
  long idler_mode = 0;
  PhotonPair photons;        ///< signal at the signal-mode centre, idler = pump - signal
  double idler_mode_hz = 0.0; ///< centre of the nearest idler comb mode
  double detuning_hz = 0.0;   ///< idler frequency minus idler mode centre
  double weight = 0.0;
};

struct SpectrumSample {
  double signal_hz = 0.0;
  double density = 0.0;
};

struct ClusterSpectrum {
  std::vector<SpectrumSample> samples; ///< one per signal comb mode, increasing frequency
  std::vector<ModePair> contributing_mode_pairs;
  double temperature_k = 0.0;
  double pump_hz = 0.0;
  double linewidth_hz = 0.0; ///< cavity linewidth at the band centre
  double fsr_hz = 0.0;       ///< group-index FSR at the band centre
};

/// Per-mode doubly-resonant emission weights over the signal band [band_lo_hz, band_hi_hz].
ClusterSpectrum cluster_spectrum(const SourceSpec& src, const PumpSpec& pump, double band_lo_hz, double band_hi_hz,
                                 const ClusterOptions& options = {});

struct ClusterEnvelope {
  double center_hz = 0.0;  ///< weight-weighted mean frequency
  double width_hz = 0.0;   ///< span of the above-threshold run, one mode spacing included
  double integrated_weight = 0.0;
  std::size_t first_sample = 0;
  std::size_t last_sample = 0;
  std::optional<std::size_t> partner; ///< index of the envelope mirrored about nu_p / 2
};

/// Groups contiguous runs with density >= threshold * max.
std::vector<ClusterEnvelope> cluster_envelopes(const ClusterSpectrum& spectrum, double threshold);

/// Contributing pairs whose signal mode lies in [channel_lo_hz, channel_hi_hz].
std::vector<ModePair> modes_in_channel(const ClusterSpectrum& spectrum, double channel_lo_hz, double channel_hi_hz);

struct ContinuumSample {
  double wavelength_m = 0.0;
  double intensity = 0.0;
};

/// Spectrum as seen by a spectrometer with Gaussian response of the given FWHM, sampled on a
/// uniform wavelength grid.
std::vector<ContinuumSample> render_spectrum(const ClusterSpectrum& spectrum, double resolution_fwhm_m,
                                             double grid_step_m);

} // namespace opo
