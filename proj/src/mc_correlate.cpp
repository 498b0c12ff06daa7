#include <algorithm>
#include <cmath>
#include <numeric>

#include "opo/errors.hpp"
#include "opo/mc.hpp"

namespace opo::mc {

CoincidenceHistogram CoincidenceHistogram::empty(double bin_width_s, double t_max_s) {
  if (!(bin_width_s > 0.0) || !(t_max_s > 0.0)) throw DomainError("histogram: bin width and range must be positive");
  const double ratio = t_max_s / bin_width_s;
  const double whole = std::round(ratio);
  if (whole < 1.0 || std::abs(ratio - whole) > 1e-9 * ratio) {
    throw DomainError("histogram: t_max must be a whole multiple of the bin width");
  }
  CoincidenceHistogram h;
  h.bin_width_s = bin_width_s;
  h.t_max_s = t_max_s;
  h.counts.assign(2 * static_cast<std::size_t>(whole), 0);
  return h;
}

double CoincidenceHistogram::bin_center(std::size_t i) const {
  return -t_max_s + (static_cast<double>(i) + 0.5) * bin_width_s;
}

std::uint64_t CoincidenceHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void CoincidenceHistogram::merge(const CoincidenceHistogram& other) {
  if (other.counts.size() != counts.size() || other.bin_width_s != bin_width_s) {
    throw DomainError("histogram merge: incompatible binning");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  const double total_duration = duration_s + other.duration_s;
  if (total_duration > 0.0) {
    start_rate_hz = (start_rate_hz * duration_s + other.start_rate_hz * other.duration_s) / total_duration;
    stop_rate_hz = (stop_rate_hz * duration_s + other.stop_rate_hz * other.duration_s) / total_duration;
  }
  duration_s = total_duration;
}

namespace {

void require_sorted(const TagStream& s) {
  if (!std::is_sorted(s.timestamps.begin(), s.timestamps.end())) {
    throw DomainError("correlate: stream '" + s.channel + "' is not sorted");
  }
}

} // namespace

CoincidenceHistogram correlate(const TagStream& starts, const TagStream& stops, double bin_width_s, double t_max_s,
                               StopMode mode) {
  require_sorted(starts);
  require_sorted(stops);
  CoincidenceHistogram h = CoincidenceHistogram::empty(bin_width_s, t_max_s);
  h.duration_s = starts.duration_s;
  h.start_rate_hz = starts.rate_hz();
  h.stop_rate_hz = stops.rate_hz();

  const auto& a = starts.timestamps;
  const auto& b = stops.timestamps;
  const auto bins = static_cast<long>(h.counts.size());
  std::size_t window = 0;
  for (double s : a) {
    if (mode == StopMode::multi) {
      while (window < b.size() && b[window] < s - t_max_s) ++window;
    } else {
      while (window < b.size() && b[window] < s) ++window;
    }
    for (std::size_t j = window; j < b.size(); ++j) {
      const double d = b[j] - s;
      if (d >= t_max_s) break;
      const auto idx = static_cast<long>(std::floor((d + t_max_s) / bin_width_s));
      if (idx >= 0 && idx < bins) ++h.counts[static_cast<std::size_t>(idx)];
      if (mode == StopMode::first) break;
    }
  }
  return h;
}

} // namespace opo::mc
