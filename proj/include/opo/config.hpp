#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "opo/cavity.hpp"
#include "opo/dwdm.hpp"
#include "opo/mc.hpp"

namespace opo {

struct SimulationSettings {
  double duration_s = 100.0;
  double bin_width_s = 100e-12;
  double t_max_s = 20e-9;
  std::uint64_t event_cap = 500'000'000;
  double photon_bandwidth_hz = 116e6; ///< df of the simulated pairs
  std::string start_detector = "d1";
  std::string stop_detector = "d2";
  double chunk_s = 1.0;
  double fit_exclude_center_s = 1.5e-9;
  double floor_fraction = 0.2;
};

struct RateSettings {
  double brightness = 134.0; ///< pairs / (s mW MHz)
  double enhancement_factor = 500.0;
};

struct ThermalSettings {
  std::vector<double> mode_weights{1.0};
  double bandwidth_hz = 116e6;
  double mean_rate_hz = 1e6;
  double duration_s = 0.1;
  double bin_width_s = 100e-12;
  double t_max_s = 40e-9;
  double split_fraction = 0.5;
  std::string detector_a; ///< empty: ideal detector
  std::string detector_b;
};

struct OutputSettings {
  std::string format = "json";
  std::string path = "-";
  double spectrometer_resolution_m = 0.5e-9;
};

struct RunConfig {
  SourceSpec source;
  ItuGrid grid;
  std::map<std::string, mc::DetectorModel> detectors;
  SimulationSettings simulation;
  RateSettings rates;
  ThermalSettings thermal;
  OutputSettings output;
  std::vector<std::string> provenance; ///< one line per default that was applied
  std::string text;                    ///< the parsed source text

  const mc::DetectorModel& detector(const std::string& name) const;
};

/// Parses the line-oriented `key = value` / `[section]` format. Keys carry their unit as a suffix
/// (`_mm`, `_nm`, `_c`, `_mw`, `_ghz`, ...); values are converted to SI on ingestion.
/// Throws ConfigError with the offending line number.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

} // namespace opo
