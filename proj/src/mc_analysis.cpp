#include <algorithm>
#include <cmath>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/mc.hpp"

namespace opo::mc {

namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

std::size_t peak_bin(const CoincidenceHistogram& hist) {
  return static_cast<std::size_t>(std::max_element(hist.counts.begin(), hist.counts.end()) - hist.counts.begin());
}

std::vector<double> counts_where(const CoincidenceHistogram& hist, double min_abs_delay) {
  std::vector<double> out;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    if (std::abs(hist.bin_center(i)) >= min_abs_delay) out.push_back(static_cast<double>(hist.counts[i]));
  }
  return out;
}

/// Half-level crossing of the peak, walking outwards from `peak` in direction `dir`.
double half_crossing(const CoincidenceHistogram& hist, std::size_t peak, int dir, double level) {
  long i = static_cast<long>(peak);
  const long n = static_cast<long>(hist.bins());
  while (i + dir >= 0 && i + dir < n && static_cast<double>(hist.counts[static_cast<std::size_t>(i + dir)]) >= level) {
    i += dir;
  }
  const long j = i + dir;
  if (j < 0 || j >= n) return hist.bin_center(static_cast<std::size_t>(i));
  const double ci = static_cast<double>(hist.counts[static_cast<std::size_t>(i)]);
  const double cj = static_cast<double>(hist.counts[static_cast<std::size_t>(j)]);
  const double frac = ci == cj ? 0.5 : (ci - level) / (ci - cj);
  return hist.bin_center(static_cast<std::size_t>(i)) + dir * frac * hist.bin_width_s;
}

struct LineFit {
  double slope = 0.0;
  double slope_error = 0.0;
  std::size_t points = 0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  return {sxy / sxx, 1.0 / std::sqrt(sxx), x.size()};
}

} // namespace

double accidental_floor(const CoincidenceHistogram& hist, const FitOptions& options, double* initial_scale_s) {
  if (hist.counts.empty()) throw NumericalError("accidental_floor: empty histogram");
  if (!(options.floor_fraction > 0.0 && options.floor_fraction < 1.0)) {
    throw DomainError("accidental_floor: floor fraction must lie in (0, 1)");
  }
  const double outer = (1.0 - options.floor_fraction) * hist.t_max_s;
  const auto outer_counts = counts_where(hist, outer);
  if (outer_counts.empty()) throw NumericalError("accidental_floor: no bins in the outer delay range");
  const double floor0 = median(outer_counts);

  const std::size_t peak = peak_bin(hist);
  const double top = static_cast<double>(hist.counts[peak]);
  const double level = floor0 + 0.5 * (top - floor0);
  const double fwhm = half_crossing(hist, peak, +1, level) - half_crossing(hist, peak, -1, level);
  const double scale = std::max(fwhm / (2.0 * std::log(2.0)), hist.bin_width_s);
  if (initial_scale_s) *initial_scale_s = scale;

  auto floor_counts = counts_where(hist, std::max(outer, 5.0 * scale));
  if (floor_counts.empty()) floor_counts = counts_where(hist, 5.0 * scale);
  if (floor_counts.empty()) throw NumericalError("accidental_floor: peak fills the delay range");
  return median(std::move(floor_counts));
}

BandwidthFit fit_bandwidth(const CoincidenceHistogram& hist, const FitOptions& options) {
  BandwidthFit fit;
  fit.floor_counts = accidental_floor(hist, options, &fit.initial_scale_s);
  const std::size_t peak = peak_bin(hist);
  fit.peak_counts = static_cast<double>(hist.counts[peak]);
  if (fit.peak_counts < options.min_peak_counts) {
    throw NumericalError("fit_bandwidth: insufficient counts (peak bin " + std::to_string(fit.peak_counts) + " < " +
                         std::to_string(options.min_peak_counts) + ")");
  }

  const double limit = std::min(5.0 * fit.initial_scale_s, (1.0 - options.floor_fraction) * hist.t_max_s);
  LineFit sides[2];
  for (int side = 0; side < 2; ++side) {
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < hist.bins(); ++i) {
      const double t = hist.bin_center(i);
      if ((side == 0) != (t < 0.0)) continue;
      const double at = std::abs(t);
      if (at < options.exclude_center_s || at > limit) continue;
      const double raw = static_cast<double>(hist.counts[i]);
      const double net = raw - fit.floor_counts;
      if (net <= 0.0) {
        ++fit.excluded_bins;
        continue;
      }
      x.push_back(at);
      y.push_back(std::log(net));
      w.push_back(net * net / std::max(raw, 1.0));
    }
    if (x.size() < 3) throw NumericalError("fit_bandwidth: fewer than three usable bins on one side of the peak");
    sides[side] = weighted_line(x, y, w);
  }

  fit.left_bandwidth_hz = -sides[0].slope / (2.0 * kPi);
  fit.right_bandwidth_hz = -sides[1].slope / (2.0 * kPi);
  fit.bandwidth_hz = 0.5 * (fit.left_bandwidth_hz + fit.right_bandwidth_hz);
  fit.standard_error_hz = 0.5 * std::hypot(sides[0].slope_error, sides[1].slope_error) / (2.0 * kPi);
  fit.asymmetry = (fit.right_bandwidth_hz - fit.left_bandwidth_hz) / fit.bandwidth_hz;
  return fit;
}

double noise_to_signal(const CoincidenceHistogram& hist, const FitOptions& options) {
  const double floor = accidental_floor(hist, options);
  const double top = static_cast<double>(hist.counts[peak_bin(hist)]);
  if (!(top > 0.0)) throw NumericalError("noise_to_signal: empty histogram");
  return floor / top;
}

G2Estimate estimate_g2(const TagStream& split_a, const TagStream& split_b, double bin_width_s, double t_max_s) {
  if (split_a.timestamps.empty() || split_b.timestamps.empty()) throw DomainError("estimate_g2: empty input stream");
  G2Estimate out;
  out.histogram = correlate(split_a, split_b, bin_width_s, t_max_s);
  const auto& h = out.histogram;

  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double t = std::abs(h.bin_center(i));
    if (t >= 0.8 * t_max_s && t <= t_max_s) {
      sum += static_cast<double>(h.counts[i]);
      ++n;
    }
  }
  if (n == 0 || sum <= 0.0) throw NumericalError("estimate_g2: plateau region is empty");
  out.plateau = sum / static_cast<double>(n);
  const double plateau_rel_var = 1.0 / sum; // Poisson: var(sum) = sum

  out.delay_s.resize(h.bins());
  out.g2.resize(h.bins());
  out.g2_error.resize(h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    out.delay_s[i] = h.bin_center(i);
    out.g2[i] = c / out.plateau;
    const double rel_var = (c > 0.0 ? 1.0 / c : 0.0) + plateau_rel_var;
    out.g2_error[i] = c > 0.0 ? out.g2[i] * std::sqrt(rel_var) : 1.0 / out.plateau;
  }
  out.g2_zero = out.g2[h.zero_bin()];
  out.g2_zero_error = out.g2_error[h.zero_bin()];
  return out;
}

CoincidenceResult run_coincidence_experiment(const CoincidenceExperiment& e) {
  if (!(e.chunk_s > 0.0)) throw DomainError("coincidence experiment: chunk length must be positive");
  if (!(e.duration_s > 0.0)) throw DomainError("coincidence experiment: duration must be positive");
  e.start_detector.validate();
  e.stop_detector.validate();

  CoincidenceResult result;
  result.histogram = CoincidenceHistogram::empty(e.bin_width_s, e.t_max_s);
  DetectorState start_state;
  DetectorState stop_state;
  const auto chunks = static_cast<std::uint64_t>(std::ceil(e.duration_s / e.chunk_s - 1e-12));
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const double length = std::min(e.chunk_s, e.duration_s - static_cast<double>(c) * e.chunk_s);
    if (length <= 0.0) break;
    auto derive = [&](std::uint64_t stream) { return make_engine(e.seed, stream, c)(); };
    auto [signal, idler] = generate_pair_stream(e.pair_rate_hz, e.bandwidth_hz, length, derive(100), e.limits);
    result.pairs_emitted += signal.timestamps.size();
    const TagStream starts = apply_detector(signal, e.start_detector, derive(101), start_state);
    const TagStream stops = apply_detector(idler, e.stop_detector, derive(102), stop_state);
    result.start_clicks += starts.timestamps.size();
    result.stop_clicks += stops.timestamps.size();
    result.histogram.merge(correlate(starts, stops, e.bin_width_s, e.t_max_s));
  }
  return result;
}

} // namespace opo::mc
