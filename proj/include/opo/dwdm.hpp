#pragma once

#include <vector>

#include "opo/cavity.hpp"

namespace opo {

/// ITU frequency grid: channel k sits at anchor + k * spacing.
struct ItuGrid {
  double anchor_hz = 193.1e12;
  double spacing_hz = 25e9;

  double center(long index) const { return anchor_hz + static_cast<double>(index) * spacing_hz; }
  void validate() const;
};

struct ChannelMatch {
  long index = 0;
  double detuning_hz = 0.0; ///< nu - channel centre, |d| <= spacing / 2
};

/// Nearest channel; exact midpoints go to the lower index.
ChannelMatch nearest_channel(const ItuGrid& grid, double frequency_hz);

struct AlignmentRow {
  long mode_index = 0;
  double frequency_hz = 0.0;
  long channel = 0;
  double detuning_hz = 0.0;
  double detuning_linewidths = 0.0; ///< |detuning| / mode linewidth
};

struct AlignmentReport {
  std::vector<AlignmentRow> rows;
  double max_abs_detuning_hz = 0.0;
  double rms_detuning_hz = 0.0;
};

AlignmentReport alignment_report(const ModeComb& comb, const ItuGrid& grid);

struct DesignBounds {
  double length_lo_m = 0.0;
  double length_hi_m = 0.0;
  double temperature_lo_k = 0.0;
  double temperature_hi_k = 0.0;
};

struct DesignOptions {
  double fsr_weight = 1.0;       ///< on ((FSR - spacing) / spacing)^2
  double alignment_weight = 1.0; ///< on mean (detuning / spacing)^2
  int scan_points = 50;          ///< per free axis
};

struct DesignScanPoint {
  double physical_length_m = 0.0;
  double temperature_k = 0.0;
  double objective = 0.0;
};

struct DesignResult {
  double physical_length_m = 0.0;
  double temperature_k = 0.0;
  double fsr_hz = 0.0;             ///< at the band centre
  double fsr_mismatch_hz = 0.0;    ///< fsr - spacing
  std::vector<AlignmentRow> detunings;
  double objective = 0.0;
  double best_scan_objective = 0.0;
  double dfsr_dlength_hz_per_m = 0.0;
  double dfsr_dtemperature_hz_per_k = 0.0;
  std::vector<DesignScanPoint> scan;
  int evaluations = 0;
};

/// Objective of match_design at one (length, temperature) point.
double design_objective(const SourceSpec& candidate, const ItuGrid& grid, double band_lo_hz, double band_hi_hz,
                        const DesignOptions& options);

/// Chooses mirror separation and temperature so the comb matches the grid over the band.
/// Coarse grid scan, then derivative-free local refinement; deterministic.
DesignResult match_design(const SourceSpec& templ, const ItuGrid& grid, const DesignBounds& bounds, double band_lo_hz,
                          double band_hi_hz, const DesignOptions& options = {});

} // namespace opo
