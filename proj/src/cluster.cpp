#include "opo/cluster.hpp"

#include <algorithm>
#include <cmath>

#include "opo/constants.hpp"
#include "opo/errors.hpp"

namespace opo {

ClusterSpectrum cluster_spectrum(const SourceSpec& src, const PumpSpec& pump, double band_lo_hz, double band_hi_hz,
                                 const ClusterOptions& options) {
  src.validate();
  pump.validate();
  if (!(band_lo_hz > 0.0 && band_lo_hz < band_hi_hz && band_hi_hz < pump.frequency_hz)) {
    throw DomainError("cluster_spectrum: invalid signal band");
  }
  if (!(options.pair_window_linewidths > 0.0)) throw DomainError("cluster_spectrum: pair window must be positive");

  const double center = 0.5 * (band_lo_hz + band_hi_hz);
  const double center_fsr = fsr(src, frequency_to_wavelength(center));

  const ModeComb signal_comb = resonance_comb(src, band_lo_hz, band_hi_hz);
  // Idler comb covers the mirrored band plus a margin so every idler has both neighbours.
  const double margin = 2.0 * center_fsr;
  const ModeComb idler_comb =
      resonance_comb(src, pump.frequency_hz - band_hi_hz - margin, pump.frequency_hz - band_lo_hz + margin);

  ClusterSpectrum out;
  out.temperature_k = src.temperature_k;
  out.pump_hz = pump.frequency_hz;
  out.fsr_hz = center_fsr;
  out.linewidth_hz = linewidth(src, frequency_to_wavelength(center));
  out.samples.reserve(signal_comb.modes.size());

  for (const CombMode& mode : signal_comb.modes) {
    const PhotonPair photons = PhotonPair::from_signal(pump, mode.frequency_hz);
    const CombMode& partner = idler_comb.modes[idler_comb.nearest(photons.idler_hz())];
    const double detuning = photons.idler_hz() - partner.frequency_hz;
    const double width = partner.linewidth_hz;
    const double envelope = pm_envelope(pump, mode.frequency_hz, src.temperature_k, src.crystal);

    double overlap = 0.0;
    if (options.acceptance == Acceptance::lorentzian) {
      const double x = 2.0 * detuning / width;
      overlap = 1.0 / (1.0 + x * x);
    } else {
      overlap = std::abs(detuning) < 0.5 * width ? 1.0 : 0.0;
    }
    const double weight = envelope * overlap;
    out.samples.push_back({mode.frequency_hz, weight});
    if (std::abs(detuning) < options.pair_window_linewidths * width) {
      out.contributing_mode_pairs.push_back(
          ModePair{mode.mode_index, partner.mode_index, photons, partner.frequency_hz, detuning, weight});
    }
  }
  return out;
}

std::vector<ClusterEnvelope> cluster_envelopes(const ClusterSpectrum& spectrum, double threshold) {
  if (spectrum.samples.empty()) throw DomainError("cluster_envelopes: empty spectrum");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("cluster_envelopes: threshold must lie in (0, 1]");

  const auto& s = spectrum.samples;
  double peak = 0.0;
  for (const auto& sample : s) peak = std::max(peak, sample.density);
  std::vector<ClusterEnvelope> out;
  if (peak <= 0.0) return out;
  const double level = threshold * peak;

  auto spacing_at = [&](std::size_t i) {
    if (s.size() < 2) return spectrum.fsr_hz;
    if (i + 1 < s.size()) return s[i + 1].signal_hz - s[i].signal_hz;
    return s[i].signal_hz - s[i - 1].signal_hz;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i].density < level) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1].density >= level) ++j;
    ClusterEnvelope env;
    env.first_sample = i;
    env.last_sample = j;
    double weighted = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
      env.integrated_weight += s[k].density;
      weighted += s[k].density * s[k].signal_hz;
    }
    env.center_hz = weighted / env.integrated_weight;
    env.width_hz = (s[j].signal_hz - s[i].signal_hz) + spacing_at(j);
    out.push_back(env);
    i = j + 1;
  }

  // Pair each envelope with the one nearest its mirror image about nu_p / 2.
  for (std::size_t a = 0; a < out.size(); ++a) {
    const double mirror = spectrum.pump_hz - out[a].center_hz;
    std::optional<std::size_t> best;
    double best_distance = 0.0;
    for (std::size_t b = 0; b < out.size(); ++b) {
      const double distance = std::abs(out[b].center_hz - mirror);
      if (!best || distance < best_distance) {
        best = b;
        best_distance = distance;
      }
    }
    const double tolerance = 0.5 * (out[a].width_hz + out[*best].width_hz) + spectrum.fsr_hz;
    if (best_distance <= tolerance) out[a].partner = best;
  }
  return out;
}

std::vector<ModePair> modes_in_channel(const ClusterSpectrum& spectrum, double channel_lo_hz, double channel_hi_hz) {
  std::vector<ModePair> out;
  for (const auto& pair : spectrum.contributing_mode_pairs) {
    const double nu = pair.photons.signal_hz();
    if (nu >= channel_lo_hz && nu <= channel_hi_hz) out.push_back(pair);
  }
  return out;
}

std::vector<ContinuumSample> render_spectrum(const ClusterSpectrum& spectrum, double resolution_fwhm_m,
                                             double grid_step_m) {
  if (spectrum.samples.empty()) throw DomainError("render_spectrum: empty spectrum");
  if (!(resolution_fwhm_m > 0.0 && grid_step_m > 0.0)) throw DomainError("render_spectrum: invalid resolution");
  const double sigma = resolution_fwhm_m / (2.0 * std::sqrt(2.0 * std::log(2.0)));

  std::vector<std::pair<double, double>> lines;
  lines.reserve(spectrum.samples.size());
  for (const auto& sample : spectrum.samples) {
    if (sample.density > 0.0) lines.emplace_back(frequency_to_wavelength(sample.signal_hz), sample.density);
  }
  std::sort(lines.begin(), lines.end());
  const double lo = frequency_to_wavelength(spectrum.samples.back().signal_hz) - 3.0 * resolution_fwhm_m;
  const double hi = frequency_to_wavelength(spectrum.samples.front().signal_hz) + 3.0 * resolution_fwhm_m;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / grid_step_m)) + 1;

  std::vector<ContinuumSample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double w = lo + static_cast<double>(i) * grid_step_m;
    double total = 0.0;
    auto first = std::lower_bound(lines.begin(), lines.end(), std::pair{w - 6.0 * sigma, 0.0});
    for (auto it = first; it != lines.end() && it->first <= w + 6.0 * sigma; ++it) {
      const double x = (w - it->first) / sigma;
      total += it->second * std::exp(-0.5 * x * x);
    }
    out[i] = {w, total};
  }
  return out;
}

} // namespace opo
