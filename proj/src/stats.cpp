#include "opo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "opo/constants.hpp"
#include "opo/errors.hpp"

namespace opo {

double pair_rate(Brightness brightness, double pump_power_w, double bandwidth_hz) {
  if (brightness.pairs_per_s_mw_mhz < 0.0 || pump_power_w < 0.0 || bandwidth_hz < 0.0) {
    throw DomainError("pair_rate: inputs must be non-negative");
  }
  return brightness.pairs_per_s_mw_mhz * (pump_power_w * 1e3) * (bandwidth_hz * 1e-6);
}

double pairs_per_mode(double pair_rate_hz, double coherence_time_s) {
  if (pair_rate_hz < 0.0 || coherence_time_s < 0.0) throw DomainError("pairs_per_mode: inputs must be non-negative");
  return pair_rate_hz * coherence_time_s;
}

RateReport rate_report(Brightness brightness, double pump_power_w, double bandwidth_hz,
                       double enhancement_factor_reported) {
  if (!(bandwidth_hz > 0.0)) throw DomainError("rate_report: bandwidth must be positive");
  RateReport r;
  r.brightness = brightness.pairs_per_s_mw_mhz;
  r.pair_rate_hz = pair_rate(brightness, pump_power_w, bandwidth_hz);
  r.coherence_time_s = 1.0 / bandwidth_hz;
  r.pairs_per_mode = pairs_per_mode(r.pair_rate_hz, r.coherence_time_s);
  r.enhancement_factor_reported = enhancement_factor_reported;
  return r;
}

double thermal_g2(double modes) {
  if (!(modes >= 1.0)) throw DomainError("thermal_g2: mode number must be >= 1");
  return 1.0 + 1.0 / modes;
}

double modes_from_g2(double g2) {
  if (!(g2 > 1.0)) throw DomainError("modes_from_g2: g2 <= 1 is not thermal statistics");
  if (g2 > 2.0) throw DomainError("modes_from_g2: g2 > 2 is super-thermal");
  return 1.0 / (g2 - 1.0);
}

Estimate modes_from_g2(Estimate g2) {
  const double excess = g2.value - 1.0;
  return {modes_from_g2(g2.value), g2.sigma / (excess * excess)};
}

namespace {

double gaussian_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

void check_shape(const Lineshape& shape, const char* role) {
  if (shape.kind == LineshapeKind::unbounded) return;
  if (!(shape.fwhm_hz > 0.0) || !std::isfinite(shape.fwhm_hz) || !std::isfinite(shape.center_hz)) {
    throw DomainError(std::string("filter_transmission: ") + role + " lineshape is not normalizable");
  }
}

} // namespace

double Lineshape::transmission(double frequency_hz) const {
  const double d = frequency_hz - center_hz;
  switch (kind) {
  case LineshapeKind::gaussian: {
    const double s = gaussian_sigma(fwhm_hz);
    return peak * std::exp(-0.5 * d * d / (s * s));
  }
  case LineshapeKind::lorentzian: {
    const double x = 2.0 * d / fwhm_hz;
    return peak / (1.0 + x * x);
  }
  case LineshapeKind::top_hat:
    return std::abs(d) <= 0.5 * fwhm_hz ? peak : 0.0;
  case LineshapeKind::unbounded:
    return peak;
  }
  return 0.0;
}

double Lineshape::density(double frequency_hz) const {
  const double d = frequency_hz - center_hz;
  switch (kind) {
  case LineshapeKind::gaussian: {
    const double s = gaussian_sigma(fwhm_hz);
    return std::exp(-0.5 * d * d / (s * s)) / (s * std::sqrt(2.0 * kPi));
  }
  case LineshapeKind::lorentzian: {
    const double gamma = 0.5 * fwhm_hz;
    return gamma / (kPi * (d * d + gamma * gamma));
  }
  case LineshapeKind::top_hat:
    return std::abs(d) <= 0.5 * fwhm_hz ? 1.0 / fwhm_hz : 0.0;
  case LineshapeKind::unbounded:
    break;
  }
  throw DomainError("filter_transmission: photon lineshape is not normalizable");
}

double filter_transmission(const Lineshape& filter, const Lineshape& photon) {
  check_shape(filter, "filter");
  if (photon.kind == LineshapeKind::unbounded) {
    throw DomainError("filter_transmission: photon lineshape is not normalizable");
  }
  check_shape(photon, "photon");
  if (!(filter.peak > 0.0 && filter.peak <= 1.0)) {
    throw DomainError("filter_transmission: filter peak must lie in (0, 1]");
  }
  if (filter.kind == LineshapeKind::unbounded) return filter.peak;

  // Integrate in units of the photon width, centred on the photon, split at every kink.
  const double scale = photon.fwhm_hz;
  auto integrand = [&](double u) {
    const double nu = photon.center_hz + u * scale;
    return filter.transmission(nu) * photon.density(nu) * scale;
  };
  std::vector<double> breaks{0.0, (filter.center_hz - photon.center_hz) / scale};
  if (filter.kind == LineshapeKind::top_hat) {
    breaks.push_back((filter.center_hz - 0.5 * filter.fwhm_hz - photon.center_hz) / scale);
    breaks.push_back((filter.center_hz + 0.5 * filter.fwhm_hz - photon.center_hz) / scale);
  }
  if (photon.kind == LineshapeKind::top_hat) {
    breaks.push_back(-0.5);
    breaks.push_back(0.5);
  }
  for (double w : {1.0, 10.0, 100.0}) {
    breaks.push_back(-w);
    breaks.push_back(w);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  const double tol = 1e-13;
  const unsigned depth = 20;
  double total = Quadrature::integrate(integrand, -inf, breaks.front(), depth, tol);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += Quadrature::integrate(integrand, breaks[i], breaks[i + 1], depth, tol);
  }
  total += Quadrature::integrate(integrand, breaks.back(), inf, depth, tol);
  return total;
}

double coincidence_profile(double bandwidth_hz, double delay_s) {
  if (!(bandwidth_hz > 0.0)) throw DomainError("coincidence_profile: bandwidth must be positive");
  return kPi * bandwidth_hz * std::exp(-2.0 * kPi * bandwidth_hz * std::abs(delay_s));
}

} // namespace opo
