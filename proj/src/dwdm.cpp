#include "opo/dwdm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/numeric.hpp"

namespace opo {

void ItuGrid::validate() const {
  if (!(spacing_hz > 0.0)) throw DomainError("grid spacing must be positive");
  if (!(anchor_hz > 0.0)) throw DomainError("grid anchor must be positive");
}

ChannelMatch nearest_channel(const ItuGrid& grid, double frequency_hz) {
  grid.validate();
  if (!(frequency_hz > 0.0)) throw DomainError("nearest_channel: frequency must be positive");
  const double x = (frequency_hz - grid.anchor_hz) / grid.spacing_hz;
  // ceil(x - 1/2) sends exact midpoints down.
  auto index = static_cast<long>(std::ceil(x - 0.5));
  double detuning = frequency_hz - grid.center(index);
  // re-fold into (-spacing/2, spacing/2]
  if (detuning > 0.5 * grid.spacing_hz) detuning -= grid.spacing_hz, ++index;
  if (detuning <= -0.5 * grid.spacing_hz) detuning += grid.spacing_hz, --index;
  return {index, detuning};
}

AlignmentReport alignment_report(const ModeComb& comb, const ItuGrid& grid) {
  if (comb.modes.empty()) throw DomainError("alignment_report: empty comb");
  AlignmentReport report;
  double sum_sq = 0.0;
  for (const auto& mode : comb.modes) {
    const auto match = nearest_channel(grid, mode.frequency_hz);
    report.rows.push_back({mode.mode_index, mode.frequency_hz, match.index, match.detuning_hz,
                           std::abs(match.detuning_hz) / mode.linewidth_hz});
    report.max_abs_detuning_hz = std::max(report.max_abs_detuning_hz, std::abs(match.detuning_hz));
    sum_sq += match.detuning_hz * match.detuning_hz;
  }
  report.rms_detuning_hz = std::sqrt(sum_sq / static_cast<double>(report.rows.size()));
  return report;
}

double design_objective(const SourceSpec& candidate, const ItuGrid& grid, double band_lo_hz, double band_hi_hz,
                        const DesignOptions& options) {
  const double center = frequency_to_wavelength(0.5 * (band_lo_hz + band_hi_hz));
  const double mismatch = (fsr(candidate, center) - grid.spacing_hz) / grid.spacing_hz;
  double value = options.fsr_weight * mismatch * mismatch;
  if (options.alignment_weight > 0.0) {
    const ModeComb comb = resonance_comb(candidate, band_lo_hz, band_hi_hz);
    double sum = 0.0;
    for (const auto& mode : comb.modes) {
      const double d = nearest_channel(grid, mode.frequency_hz).detuning_hz / grid.spacing_hz;
      sum += d * d;
    }
    value += options.alignment_weight * sum / static_cast<double>(comb.modes.size());
  }
  return value;
}

DesignResult match_design(const SourceSpec& templ, const ItuGrid& grid, const DesignBounds& bounds, double band_lo_hz,
                          double band_hi_hz, const DesignOptions& options) {
  grid.validate();
  if (!(bounds.length_lo_m <= bounds.length_hi_m) || !(bounds.temperature_lo_k <= bounds.temperature_hi_k)) {
    throw DomainError("match_design: infeasible bounds (lower bound above upper bound)");
  }
  if (!(bounds.length_lo_m > templ.crystal.length_m)) {
    throw DomainError("match_design: infeasible bounds (length must exceed the crystal length)");
  }
  if (bounds.temperature_lo_k < templ.crystal.window.temperature_min_k ||
      bounds.temperature_hi_k > templ.crystal.window.temperature_max_k) {
    throw DomainError("match_design: infeasible bounds (temperature outside the dispersion window)");
  }
  if (!(band_lo_hz > 0.0 && band_lo_hz < band_hi_hz)) throw DomainError("match_design: invalid band");
  if (options.scan_points < 2) throw DomainError("match_design: need at least two scan points per axis");
  if (!(options.fsr_weight >= 0.0 && options.alignment_weight >= 0.0)) {
    throw DomainError("match_design: weights must be non-negative");
  }

  DesignResult result;
  auto candidate_at = [&](double length, double temperature) {
    SourceSpec s = templ;
    s.physical_length_m = std::clamp(length, bounds.length_lo_m, bounds.length_hi_m);
    s.temperature_k = std::clamp(temperature, bounds.temperature_lo_k, bounds.temperature_hi_k);
    return s;
  };
  auto objective = [&](double length, double temperature) {
    ++result.evaluations;
    const SourceSpec s = candidate_at(length, temperature);
    const double value = design_objective(s, grid, band_lo_hz, band_hi_hz, options);
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os.precision(12);
      os << "match_design: non-finite objective at length " << s.physical_length_m << " m, temperature "
         << s.temperature_k << " K";
      throw NumericalError(os.str());
    }
    return value;
  };

  const bool free_length = bounds.length_hi_m > bounds.length_lo_m;
  const bool free_temperature = bounds.temperature_hi_k > bounds.temperature_lo_k;
  const int n_length = free_length ? options.scan_points : 1;
  const int n_temperature = free_temperature ? options.scan_points : 1;

  DesignScanPoint best{bounds.length_lo_m, bounds.temperature_lo_k, std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n_length; ++i) {
    const double length =
        free_length ? bounds.length_lo_m + (bounds.length_hi_m - bounds.length_lo_m) * i / (n_length - 1)
                    : bounds.length_lo_m;
    for (int j = 0; j < n_temperature; ++j) {
      const double temperature =
          free_temperature
              ? bounds.temperature_lo_k + (bounds.temperature_hi_k - bounds.temperature_lo_k) * j / (n_temperature - 1)
              : bounds.temperature_lo_k;
      DesignScanPoint p{length, temperature, objective(length, temperature)};
      result.scan.push_back(p);
      if (p.objective < best.objective) best = p;
    }
  }
  result.best_scan_objective = best.objective;

  const double center_wavelength = frequency_to_wavelength(0.5 * (band_lo_hz + band_hi_hz));
  DesignScanPoint current = best;
  auto consider = [&](double length, double temperature) {
    const SourceSpec s = candidate_at(length, temperature);
    const double value = objective(s.physical_length_m, s.temperature_k);
    if (value < current.objective) current = {s.physical_length_m, s.temperature_k, value};
  };

  // Stage 1: put the FSR on the grid spacing at the scan temperature (smooth, monotone in length).
  if (free_length && options.fsr_weight > 0.0) {
    auto mismatch = [&](double length) {
      return fsr(candidate_at(length, current.temperature_k), center_wavelength) - grid.spacing_hz;
    };
    const double a = mismatch(bounds.length_lo_m);
    const double b = mismatch(bounds.length_hi_m);
    if ((a > 0.0) != (b > 0.0)) {
      const double root = numeric::find_root(mismatch, bounds.length_lo_m, bounds.length_hi_m);
      const double t = current.temperature_k;
      current.objective = std::numeric_limits<double>::infinity(); // the root is the reference for later stages
      consider(root, t);
    }
  }

  // Stage 2: the alignment term repeats every half wavelength of optical length; scan one period.
  if (free_length && options.alignment_weight > 0.0) {
    const DesignScanPoint anchor = current;
    const int samples = 101;
    for (int k = 0; k < samples; ++k) {
      const double offset = center_wavelength * (static_cast<double>(k) / (samples - 1) - 0.5);
      consider(anchor.physical_length_m + offset, anchor.temperature_k);
    }
  }

  // Stage 3: simplex polish over the free axes.
  if (free_length || free_temperature) {
    std::vector<double> x0, step;
    if (free_length) {
      x0.push_back(current.physical_length_m);
      step.push_back(center_wavelength / 20.0);
    }
    if (free_temperature) {
      x0.push_back(current.temperature_k);
      step.push_back(0.05);
    }
    auto unpack = [&](const std::vector<double>& x) {
      double length = current.physical_length_m;
      double temperature = current.temperature_k;
      std::size_t k = 0;
      if (free_length) length = x[k++];
      if (free_temperature) temperature = x[k++];
      return std::pair{length, temperature};
    };
    numeric::NelderMeadOptions nm;
    nm.max_evaluations = 800;
    nm.f_tol = 1e-20;
    const auto polished = numeric::nelder_mead(
        [&](const std::vector<double>& x) {
          const auto [length, temperature] = unpack(x);
          return objective(length, temperature);
        },
        x0, step, nm);
    const auto [length, temperature] = unpack(polished.x);
    consider(length, temperature);
  }

  // Never return anything worse than the best scan point.
  if (best.objective < current.objective) current = best;

  const SourceSpec chosen = candidate_at(current.physical_length_m, current.temperature_k);
  result.physical_length_m = chosen.physical_length_m;
  result.temperature_k = chosen.temperature_k;
  result.objective = current.objective;
  result.fsr_hz = fsr(chosen, center_wavelength);
  result.fsr_mismatch_hz = result.fsr_hz - grid.spacing_hz;
  result.detunings = alignment_report(resonance_comb(chosen, band_lo_hz, band_hi_hz), grid).rows;

  auto fsr_at = [&](double length, double temperature) {
    SourceSpec s = templ;
    s.physical_length_m = length;
    s.temperature_k = temperature;
    return fsr(s, center_wavelength);
  };
  const double dl = 1e-6;
  const double dt = 0.01;
  result.dfsr_dlength_hz_per_m =
      (fsr_at(chosen.physical_length_m + dl, chosen.temperature_k) - fsr_at(chosen.physical_length_m - dl, chosen.temperature_k)) /
      (2.0 * dl);
  result.dfsr_dtemperature_hz_per_k =
      (fsr_at(chosen.physical_length_m, chosen.temperature_k + dt) - fsr_at(chosen.physical_length_m, chosen.temperature_k - dt)) /
      (2.0 * dt);
  return result;
}

} // namespace opo
