#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <numeric>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "opo/constants.hpp"
#include "opo/errors.hpp"
#include "opo/mc.hpp"

namespace opo::mc {

namespace {

constexpr std::uint64_t kPairStreamId = 1;
constexpr std::uint64_t kThermalStreamId = 3;
/// Tail probability allowed above the thinning bound.
constexpr double kBoundTailProbability = 1e-12;
constexpr double kSegmentSeconds = 1.0;

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(std::string(what) + " must be positive and finite");
}

void check_cap(double expected_events, const StreamLimits& limits, const char* what) {
  if (expected_events > static_cast<double>(limits.event_cap)) {
    throw ResourceError(std::string(what) + ": expected " + std::to_string(expected_events) +
                        " events exceeds the event cap of " + std::to_string(limits.event_cap));
  }
}

/// Keeps the first of any run of equal timestamps.
void make_strict(std::vector<double>& t) { t.erase(std::unique(t.begin(), t.end()), t.end()); }

struct PairSegment {
  std::vector<double> signal;
  std::vector<double> idler;
};

PairSegment pair_segment(double rate_hz, double bandwidth_hz, double start_s, double end_s, double duration_s,
                         std::uint64_t seed, std::uint64_t index) {
  auto engine = make_engine(seed, kPairStreamId, index);
  std::exponential_distribution<double> gap(rate_hz);
  std::exponential_distribution<double> delay(2.0 * kPi * bandwidth_hz);
  std::bernoulli_distribution sign(0.5);

  PairSegment out;
  const double expected = rate_hz * (end_s - start_s);
  out.signal.reserve(static_cast<std::size_t>(expected * 1.01 + 16));
  out.idler.reserve(out.signal.capacity());
  double t = start_s;
  while (true) {
    t += gap(engine);
    if (t >= end_s) break;
    const double d = delay(engine);
    const double idler = sign(engine) ? t + d : t - d;
    out.signal.push_back(t);
    if (idler >= 0.0 && idler <= duration_s) out.idler.push_back(idler);
  }
  return out;
}

/// Smallest b with the Chernoff bound on P(sum p_j E_j > b) below kBoundTailProbability, where
/// E_j are unit exponentials and p_j the normalized weights.
double intensity_bound(const std::vector<double>& p) {
  const double p_max = *std::max_element(p.begin(), p.end());
  auto log_tail = [&](double b) {
    double best = 0.0;
    for (int k = 1; k < 400; ++k) {
      const double s = k / (400.0 * p_max);
      double log_mgf = 0.0;
      for (double pj : p) log_mgf -= std::log1p(-s * pj);
      best = std::min(best, log_mgf - s * b);
    }
    return best;
  };
  const double target = std::log(kBoundTailProbability);
  double lo = 1.0;
  double hi = 2.0;
  while (log_tail(hi) > target) hi *= 2.0;
  for (int i = 0; i < 60 && hi - lo > 1e-3; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_tail(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

} // namespace

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),      static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                    static_cast<std::uint32_t>(chunk),     static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

std::pair<TagStream, TagStream> generate_pair_stream(double rate_hz, double bandwidth_hz, double duration_s,
                                                     std::uint64_t seed, const StreamLimits& limits) {
  if (!(rate_hz >= 0.0) || !std::isfinite(rate_hz)) throw DomainError("generate_pair_stream: rate must be >= 0");
  check_positive(bandwidth_hz, "generate_pair_stream: bandwidth");
  check_positive(duration_s, "generate_pair_stream: duration");
  check_cap(rate_hz * duration_s, limits, "generate_pair_stream");

  TagStream signal{"signal", {}, duration_s, seed, "pair source"};
  TagStream idler{"idler", {}, duration_s, seed, "pair source"};
  if (rate_hz == 0.0) return {signal, idler};

  // segment boundaries do not depend on the thread count
  const auto segments = static_cast<std::uint64_t>(std::ceil(duration_s / kSegmentSeconds));
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<PairSegment> parts(segments);
  for (std::uint64_t first = 0; first < segments; first += workers) {
    const std::uint64_t last = std::min<std::uint64_t>(segments, first + workers);
    std::vector<std::future<PairSegment>> jobs;
    for (std::uint64_t s = first; s < last; ++s) {
      const double a = static_cast<double>(s) * kSegmentSeconds;
      const double b = std::min(duration_s, a + kSegmentSeconds);
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, pair_segment, rate_hz,
                                bandwidth_hz, a, b, duration_s, seed, s));
    }
    for (std::uint64_t s = first; s < last; ++s) parts[s] = jobs[s - first].get();
  }

  std::size_t n_signal = 0;
  std::size_t n_idler = 0;
  for (const auto& p : parts) {
    n_signal += p.signal.size();
    n_idler += p.idler.size();
  }
  signal.timestamps.reserve(n_signal);
  idler.timestamps.reserve(n_idler);
  for (auto& p : parts) {
    signal.timestamps.insert(signal.timestamps.end(), p.signal.begin(), p.signal.end());
    idler.timestamps.insert(idler.timestamps.end(), p.idler.begin(), p.idler.end());
    p = PairSegment{};
  }
  std::sort(idler.timestamps.begin(), idler.timestamps.end());
  make_strict(signal.timestamps);
  make_strict(idler.timestamps);
  return {std::move(signal), std::move(idler)};
}

TagStream thermal_click_stream(int modes, double bandwidth_hz, double mean_rate_hz, double duration_s,
                               std::uint64_t seed, const StreamLimits& limits) {
  if (modes < 1) throw DomainError("thermal_click_stream: need at least one mode");
  const std::vector<double> weights(static_cast<std::size_t>(modes), 1.0);
  return thermal_click_stream(weights, bandwidth_hz, mean_rate_hz, duration_s, seed, limits);
}

TagStream thermal_click_stream(std::span<const double> mode_weights, double bandwidth_hz, double mean_rate_hz,
                               double duration_s, std::uint64_t seed, const StreamLimits& limits) {
  if (mode_weights.empty()) throw DomainError("thermal_click_stream: need at least one mode");
  check_positive(bandwidth_hz, "thermal_click_stream: bandwidth");
  check_positive(mean_rate_hz, "thermal_click_stream: mean rate");
  check_positive(duration_s, "thermal_click_stream: duration");
  const double total_weight = std::accumulate(mode_weights.begin(), mode_weights.end(), 0.0);
  for (double w : mode_weights) {
    if (!(w >= 0.0)) throw DomainError("thermal_click_stream: mode weights must be non-negative");
  }
  if (!(total_weight > 0.0)) throw DomainError("thermal_click_stream: mode weights sum to zero");
  check_cap(mean_rate_hz * duration_s, limits, "thermal_click_stream");

  std::vector<double> power(mode_weights.begin(), mode_weights.end());
  for (double& w : power) w /= total_weight;
  // Thinning: candidates at `bound` times the mean rate, each accepted with probability I / bound.
  // Amplitudes are propagated exactly between candidate times.
  const double bound = intensity_bound(power);
  const double gamma = kPi * bandwidth_hz;
  const double candidate_rate = bound * mean_rate_hz;

  auto engine = make_engine(seed, kThermalStreamId);
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> gap(candidate_rate);

  std::vector<double> scale(mode_weights.size());
  std::vector<std::complex<double>> field(mode_weights.size());
  for (std::size_t j = 0; j < field.size(); ++j) {
    scale[j] = std::sqrt(mode_weights[j] / total_weight);
    field[j] = scale[j] * std::complex<double>(normal(engine), normal(engine));
  }

  TagStream out{"thermal", {}, duration_s, seed, "thermal source, " + std::to_string(mode_weights.size()) + " modes"};
  out.timestamps.reserve(static_cast<std::size_t>(mean_rate_hz * duration_s * 1.05 + 16));
  double t = 0.0;
  while (true) {
    const double dt = gap(engine);
    t += dt;
    if (t > duration_s) break;
    const double decay = std::exp(-gamma * dt);
    const double drive = std::sqrt(-std::expm1(-2.0 * gamma * dt));
    double intensity = 0.0;
    for (std::size_t j = 0; j < field.size(); ++j) {
      field[j] = decay * field[j] + drive * scale[j] * std::complex<double>(normal(engine), normal(engine));
      intensity += std::norm(field[j]);
    }
    if (uniform(engine) * bound < intensity) out.timestamps.push_back(t);
  }
  make_strict(out.timestamps);
  return out;
}

} // namespace opo::mc
