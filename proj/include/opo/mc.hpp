#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace opo::mc {

/// Time-ordered detection timestamps on one channel.
struct TagStream {
  std::string channel;
  std::vector<double> timestamps; ///< seconds, strictly increasing, within [0, duration_s]
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  std::string provenance;

  double rate_hz() const { return duration_s > 0.0 ? static_cast<double>(timestamps.size()) / duration_s : 0.0; }
  /// Throws DomainError when timestamps are unsorted, duplicated or outside [0, duration].
  void validate() const;
};

struct Gate {
  double period_s = 0.0;
  double width_s = 0.0;
  double phase_s = 0.0; ///< opening time of the gate containing t = 0 (modulo period)

  bool is_open(double t) const;
};

struct DetectorModel {
  double efficiency = 1.0;
  double jitter_sigma_s = 0.0;
  double dead_time_s = 0.0;
  double dark_rate_hz = 0.0; ///< while armed; gated detectors only count inside gates
  std::optional<Gate> gate;  ///< absent: free running

  void validate() const;
};

/// Dead-time memory carried between consecutive chunks of one detector.
struct DetectorState {
  std::optional<double> last_click_s; ///< relative to the start of the next chunk
};

struct CoincidenceHistogram {
  double bin_width_s = 0.0;
  double t_max_s = 0.0;
  std::vector<std::uint64_t> counts; ///< bin i covers [-t_max + i w, -t_max + (i + 1) w)
  double start_rate_hz = 0.0;
  double stop_rate_hz = 0.0;
  double duration_s = 0.0;

  static CoincidenceHistogram empty(double bin_width_s, double t_max_s);
  std::size_t bins() const { return counts.size(); }
  double bin_center(std::size_t i) const;
  /// Bin containing zero delay.
  std::size_t zero_bin() const { return counts.size() / 2; }
  std::uint64_t total() const;
  /// Adds counts and durations of a histogram with the same binning (rates duration-weighted).
  void merge(const CoincidenceHistogram& other);
};

struct StreamLimits {
  std::uint64_t event_cap = 500'000'000;
};

/// Engine for a (seed, stream, chunk) triple; streams with different ids are independent.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t chunk = 0);

/// Signal and idler timestamps of a CW pair source: Poisson emission at `rate_hz`, idler - signal
/// delay drawn from the two-sided exponential with decay 2 pi df.
std::pair<TagStream, TagStream> generate_pair_stream(double rate_hz, double bandwidth_hz, double duration_s,
                                                     std::uint64_t seed, const StreamLimits& limits = {});

/// Clicks of N equally weighted thermal modes of Lorentzian linewidth df.
TagStream thermal_click_stream(int modes, double bandwidth_hz, double mean_rate_hz, double duration_s,
                               std::uint64_t seed, const StreamLimits& limits = {});

/// Same as above with per-mode power weights (normalized internally). Effective mode number is
/// (sum w)^2 / sum w^2.
TagStream thermal_click_stream(std::span<const double> mode_weights, double bandwidth_hz, double mean_rate_hz,
                               double duration_s, std::uint64_t seed, const StreamLimits& limits = {});

/// Gating, efficiency, dark counts, jitter, dead time, in that order.
TagStream apply_detector(const TagStream& stream, const DetectorModel& model, std::uint64_t seed);
TagStream apply_detector(const TagStream& stream, const DetectorModel& model, std::uint64_t seed,
                         DetectorState& state);

/// Routes every click at random to output a (probability `fraction_a`) or b.
std::pair<TagStream, TagStream> split_stream(const TagStream& stream, double fraction_a, std::uint64_t seed);

enum class StopMode {
  multi, ///< every stop within +-t_max of each start
  first, ///< only the first stop at non-negative delay
};

/// Start-stop correlation of stop - start delays.
CoincidenceHistogram correlate(const TagStream& starts, const TagStream& stops, double bin_width_s, double t_max_s,
                               StopMode mode = StopMode::multi);

struct FitOptions {
  double floor_fraction = 0.2;   ///< outer fraction of the delay range used for the accidental floor
  double exclude_center_s = 0.0; ///< ignore |T| below this (jitter-rounded top)
  double min_peak_counts = 100.0;
};

struct BandwidthFit {
  double bandwidth_hz = 0.0;
  double standard_error_hz = 0.0;
  double left_bandwidth_hz = 0.0;
  double right_bandwidth_hz = 0.0;
  double asymmetry = 0.0; ///< (right - left) / mean
  double floor_counts = 0.0;
  double peak_counts = 0.0;
  double initial_scale_s = 0.0;
  std::size_t excluded_bins = 0; ///< fit-range bins dropped because floor subtraction left them <= 0
};

/// Accidental floor: median of bins in the outer floor_fraction of the range that also lie beyond
/// five initial decay scales.
double accidental_floor(const CoincidenceHistogram& hist, const FitOptions& options, double* initial_scale_s = nullptr);

/// Log-linear fit of the floor-subtracted peak on each side.
BandwidthFit fit_bandwidth(const CoincidenceHistogram& hist, const FitOptions& options = {});

/// Accidental floor over peak bin height.
double noise_to_signal(const CoincidenceHistogram& hist, const FitOptions& options = {});

struct G2Estimate {
  CoincidenceHistogram histogram;
  std::vector<double> delay_s;
  std::vector<double> g2;
  std::vector<double> g2_error;
  double plateau = 0.0; ///< mean counts over |tau| in [0.8, 1.0] t_max
  double g2_zero = 0.0;
  double g2_zero_error = 0.0;
};

/// Normalized cross-correlation of the two outputs of a beam splitter.
G2Estimate estimate_g2(const TagStream& split_a, const TagStream& split_b, double bin_width_s, double t_max_s);

struct CoincidenceExperiment {
  double pair_rate_hz = 0.0;
  double bandwidth_hz = 0.0;
  double duration_s = 0.0;
  DetectorModel start_detector;
  DetectorModel stop_detector;
  double bin_width_s = 100e-12;
  double t_max_s = 20e-9;
  double chunk_s = 1.0;
  std::uint64_t seed = 0;
  StreamLimits limits;
};

struct CoincidenceResult {
  CoincidenceHistogram histogram;
  std::uint64_t pairs_emitted = 0;
  std::uint64_t start_clicks = 0;
  std::uint64_t stop_clicks = 0;
};

/// generate -> detect -> correlate, in independent chunks so memory stays bounded.
CoincidenceResult run_coincidence_experiment(const CoincidenceExperiment& experiment);

/// Plain-text stream: '#'-prefixed header lines (channel, duration, seed, provenance) then one
/// timestamp per line with 12 significant digits.
void write_tagstream(std::ostream& os, const TagStream& stream);
TagStream read_tagstream(std::istream& is);

/// CSV `delay_s,counts`, one row per bin (bin centres).
void write_histogram_csv(std::ostream& os, const CoincidenceHistogram& hist);

} // namespace opo::mc
