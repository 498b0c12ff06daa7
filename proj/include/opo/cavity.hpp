#pragma once

#include <vector>

#include "opo/dispersion.hpp"

namespace opo {

enum class MirrorGeometry { flat, concave };

struct MirrorSpec {
  double reflectivity = 1.0; ///< power reflectivity in (0, 1]
  MirrorGeometry geometry = MirrorGeometry::flat;
  double focal_length_m = 0.0; ///< concave mirrors only

  double radius_of_curvature_m() const { return 2.0 * focal_length_m; }
  void validate() const;
};

/// Plano-concave resonator with the crystal inside. Temperatures are in kelvin.
struct SourceSpec {
  CrystalSpec crystal;
  MirrorSpec flat_mirror{1.0, MirrorGeometry::flat, 0.0};
  MirrorSpec concave_mirror{1.0, MirrorGeometry::concave, 0.0};
  double physical_length_m = 0.0; ///< mirror to mirror
  double pump_wavelength_m = 0.0;
  double pump_power_w = 0.0;
  double temperature_k = 0.0;
  double spacer_expansion_per_k = 0.0; ///< 0: athermal mount
  bool gouy_phase = false;             ///< include the fundamental-mode Gouy shift in mode positions

  /// Type invariants, including resonator stability.
  void validate() const;
};

enum class IndexKind { phase, group };

/// Crystal length at the source temperature.
double crystal_length_at(const SourceSpec& src);
/// Mirror-to-mirror distance at the source temperature.
double physical_length_at(const SourceSpec& src);

/// Air path plus n (or n_g) times the crystal path, single pass.
double optical_length(const SourceSpec& src, double wavelength_m, IndexKind kind);

/// c / (2 L_opt) using the group index.
double fsr(const SourceSpec& src, double wavelength_m);

/// Round-trip power factor R_flat R_concave t^2 (crystal crossed twice).
double round_trip_factor(const SourceSpec& src);

/// pi rho^(1/4) / (1 - sqrt(rho)).
double finesse(const SourceSpec& src);

/// FWHM linewidth fsr / finesse, in Hz.
double linewidth(const SourceSpec& src, double wavelength_m);

/// tau = 1 / df.
double coherence_time(double linewidth_hz);

/// Plano-concave reduced length L_air + L_crystal / n used for Gaussian-beam propagation.
double reduced_length(const SourceSpec& src, double wavelength_m);

/// Round-trip Gouy phase of the fundamental mode (0 when `gouy_phase` is off).
double gouy_phase(const SourceSpec& src, double wavelength_m);

/// Fundamental-mode waist radius, located at the flat mirror.
double mode_waist(const SourceSpec& src, double wavelength_m);

/// Fraction of intracavity loss leaving through the flat mirror.
double escape_probability(const SourceSpec& src);

struct CombMode {
  long mode_index = 0;
  double frequency_hz = 0.0;
  double linewidth_hz = 0.0;
  double fsr_hz = 0.0; ///< local group-index FSR at this mode
};

struct ModeComb {
  std::vector<CombMode> modes; ///< strictly increasing frequency
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;

  /// FSR of the mode nearest to `frequency_hz`.
  double local_fsr(double frequency_hz) const;
  /// Index into `modes` of the mode nearest to `frequency_hz`.
  std::size_t nearest(double frequency_hz) const;
};

/// Round-trip phase in units of 2 pi: 2 nu L_opt(nu) / c - gouy / (2 pi).
double round_trip_order(const SourceSpec& src, double frequency_hz);

/// All longitudinal resonances in [band_lo_hz, band_hi_hz].
ModeComb resonance_comb(const SourceSpec& src, double band_lo_hz, double band_hi_hz);

struct TransmissionSample {
  double frequency_hz = 0.0;
  double transmission = 0.0;
};

/// Peak on-resonance power transmission T1 T2 t / (1 - sqrt(rho))^2.
double peak_transmission(const SourceSpec& src);

/// Airy transmission sampled every `sample_step_hz` across the band.
std::vector<TransmissionSample> transmission_scan(const SourceSpec& src, double band_lo_hz, double band_hi_hz,
                                                  double sample_step_hz);

} // namespace opo
