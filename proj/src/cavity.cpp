#include "opo/cavity.hpp"

#include <algorithm>
#include <cmath>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/numeric.hpp"

namespace opo {

void MirrorSpec::validate() const {
  if (!(reflectivity > 0.0 && reflectivity <= 1.0)) throw DomainError("mirror reflectivity must lie in (0, 1]");
  if (geometry == MirrorGeometry::concave && !(focal_length_m > 0.0)) {
    throw DomainError("concave mirror needs a positive focal length");
  }
}

void SourceSpec::validate() const {
  crystal.validate();
  flat_mirror.validate();
  concave_mirror.validate();
  if (flat_mirror.geometry != MirrorGeometry::flat) throw DomainError("flat_mirror must be flat");
  if (concave_mirror.geometry != MirrorGeometry::concave) throw DomainError("concave_mirror must be concave");
  if (!(physical_length_m > crystal.length_m)) throw DomainError("cavity length must exceed the crystal length");
  if (!(pump_wavelength_m > 0.0)) throw DomainError("pump wavelength must be positive");
  if (!(pump_power_w > 0.0)) throw DomainError("pump power must be positive");
  if (!(temperature_k > 0.0)) throw DomainError("temperature must be positive");
  const double l_eff = reduced_length(*this, 2.0 * pump_wavelength_m);
  const double g = 1.0 - l_eff / concave_mirror.radius_of_curvature_m();
  if (!(g > 0.0 && g < 1.0)) throw DomainError("unstable resonator: need 0 < 1 - L_eff/ROC < 1");
}

double crystal_length_at(const SourceSpec& src) {
  return src.crystal.length_m * expansion_factor(src.crystal, src.temperature_k);
}

double physical_length_at(const SourceSpec& src) {
  return src.physical_length_m * (1.0 + src.spacer_expansion_per_k * (src.temperature_k - kExpansionReferenceK));
}

double optical_length(const SourceSpec& src, double wavelength_m, IndexKind kind) {
  const double lc = crystal_length_at(src);
  const double air = physical_length_at(src) - lc;
  if (lc == 0.0) {
    check_window(src.crystal, wavelength_m, src.temperature_k);
    return air;
  }
  const double n = kind == IndexKind::phase ? refractive_index(wavelength_m, src.temperature_k, src.crystal)
                                            : group_index(wavelength_m, src.temperature_k, src.crystal);
  return air + n * lc;
}

double fsr(const SourceSpec& src, double wavelength_m) {
  return kSpeedOfLight / (2.0 * optical_length(src, wavelength_m, IndexKind::group));
}

double round_trip_factor(const SourceSpec& src) {
  const double t = src.crystal.transmission;
  return src.flat_mirror.reflectivity * src.concave_mirror.reflectivity * t * t;
}

double finesse(const SourceSpec& src) {
  const double rho = round_trip_factor(src);
  if (rho >= 1.0) throw DomainError("lossless cavity: finesse is unbounded");
  if (!(rho > 0.0)) throw DomainError("round-trip factor must be positive");
  return kPi * std::pow(rho, 0.25) / (1.0 - std::sqrt(rho));
}

double linewidth(const SourceSpec& src, double wavelength_m) { return fsr(src, wavelength_m) / finesse(src); }

double coherence_time(double linewidth_hz) {
  if (!(linewidth_hz > 0.0)) throw DomainError("coherence_time: bandwidth must be positive");
  return 1.0 / linewidth_hz;
}

double reduced_length(const SourceSpec& src, double wavelength_m) {
  const double lc = crystal_length_at(src);
  const double air = physical_length_at(src) - lc;
  if (lc == 0.0) return air;
  return air + lc / refractive_index(wavelength_m, src.temperature_k, src.crystal);
}

double gouy_phase(const SourceSpec& src, double wavelength_m) {
  if (!src.gouy_phase) return 0.0;
  const double g = 1.0 - reduced_length(src, wavelength_m) / src.concave_mirror.radius_of_curvature_m();
  if (!(g > 0.0 && g < 1.0)) throw DomainError("unstable resonator: need 0 < 1 - L_eff/ROC < 1");
  return 2.0 * std::acos(std::sqrt(g));
}

double mode_waist(const SourceSpec& src, double wavelength_m) {
  const double l_eff = reduced_length(src, wavelength_m);
  const double roc = src.concave_mirror.radius_of_curvature_m();
  if (!(l_eff >= 0.0 && l_eff < roc)) throw DomainError("unstable resonator: reduced length must be below ROC");
  const double w2 = wavelength_m / kPi * std::sqrt(l_eff * (roc - l_eff));
  return std::sqrt(w2);
}

double escape_probability(const SourceSpec& src) {
  const double out = 1.0 - src.flat_mirror.reflectivity;
  const double total = out + (1.0 - src.concave_mirror.reflectivity) + 2.0 * (1.0 - src.crystal.transmission);
  if (!(total > 0.0)) throw DomainError("escape_probability: cavity has no loss");
  return out / total;
}

double ModeComb::local_fsr(double frequency_hz) const { return modes.at(nearest(frequency_hz)).fsr_hz; }

std::size_t ModeComb::nearest(double frequency_hz) const {
  if (modes.empty()) throw DomainError("empty mode comb");
  auto it = std::lower_bound(modes.begin(), modes.end(), frequency_hz,
                             [](const CombMode& m, double f) { return m.frequency_hz < f; });
  if (it == modes.end()) return modes.size() - 1;
  if (it == modes.begin()) return 0;
  const auto prev = std::prev(it);
  return (frequency_hz - prev->frequency_hz) <= (it->frequency_hz - frequency_hz)
             ? static_cast<std::size_t>(prev - modes.begin())
             : static_cast<std::size_t>(it - modes.begin());
}

double round_trip_order(const SourceSpec& src, double frequency_hz) {
  const double lambda = frequency_to_wavelength(frequency_hz);
  const double order = 2.0 * frequency_hz * optical_length(src, lambda, IndexKind::phase) / kSpeedOfLight;
  return src.gouy_phase ? order - gouy_phase(src, lambda) / (2.0 * kPi) : order;
}

ModeComb resonance_comb(const SourceSpec& src, double band_lo_hz, double band_hi_hz) {
  if (!(band_lo_hz > 0.0 && band_lo_hz < band_hi_hz)) throw DomainError("resonance_comb: invalid band");
  check_window(src.crystal, frequency_to_wavelength(band_lo_hz), src.temperature_k);
  check_window(src.crystal, frequency_to_wavelength(band_hi_hz), src.temperature_k);

  const long m_lo = static_cast<long>(std::ceil(round_trip_order(src, band_lo_hz)));
  const long m_hi = static_cast<long>(std::floor(round_trip_order(src, band_hi_hz)));
  if (m_hi < m_lo) throw DomainError("resonance_comb: no modes in band");

  const double f_max = wavelength_to_frequency(src.crystal.window.wavelength_min_m);
  const double fin = finesse(src);

  ModeComb comb;
  comb.band_lo_hz = band_lo_hz;
  comb.band_hi_hz = band_hi_hz;
  comb.modes.reserve(static_cast<std::size_t>(m_hi - m_lo + 1));
  double previous = band_lo_hz;
  for (long m = m_lo; m <= m_hi; ++m) {
    auto residual = [&](double f) { return round_trip_order(src, f) - static_cast<double>(m); };
    // Modes are nearly uniform: start from the previous root and step at most two local FSRs.
    double lo = band_lo_hz;
    double hi = band_hi_hz;
    if (m != m_lo) {
      lo = previous;
      hi = std::min(f_max, previous + 2.0 * fsr(src, frequency_to_wavelength(previous)));
    }
    const double nu = numeric::find_root(residual, lo, hi);
    const double lambda = frequency_to_wavelength(nu);
    const double local = fsr(src, lambda);
    comb.modes.push_back(CombMode{m, nu, local / fin, local});
    previous = nu;
  }
  return comb;
}

double peak_transmission(const SourceSpec& src) {
  const double rho = round_trip_factor(src);
  const double denom = 1.0 - std::sqrt(rho);
  return (1.0 - src.flat_mirror.reflectivity) * (1.0 - src.concave_mirror.reflectivity) * src.crystal.transmission /
         (denom * denom);
}

std::vector<TransmissionSample> transmission_scan(const SourceSpec& src, double band_lo_hz, double band_hi_hz,
                                                  double sample_step_hz) {
  if (!(band_lo_hz > 0.0 && band_lo_hz < band_hi_hz)) throw DomainError("transmission_scan: invalid band");
  const double center = 0.5 * (band_lo_hz + band_hi_hz);
  const double width = linewidth(src, frequency_to_wavelength(center));
  if (!(sample_step_hz > 0.0 && sample_step_hz < width / 4.0)) {
    throw DomainError("transmission_scan: sample step must be below linewidth/4 (" + std::to_string(width / 4.0) +
                      " Hz)");
  }
  const double fin = finesse(src);
  const double coefficient = (2.0 * fin / kPi) * (2.0 * fin / kPi);
  const double t_max = peak_transmission(src);
  const auto count = static_cast<std::size_t>(std::floor((band_hi_hz - band_lo_hz) / sample_step_hz)) + 1;
  std::vector<TransmissionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = band_lo_hz + static_cast<double>(i) * sample_step_hz;
    const double s = std::sin(kPi * round_trip_order(src, f));
    out.push_back({f, t_max / (1.0 + coefficient * s * s)});
  }
  return out;
}

} // namespace opo
