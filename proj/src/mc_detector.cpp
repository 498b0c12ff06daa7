#include <algorithm>
#include <cmath>

#include "opo/errors.hpp"
#include "opo/mc.hpp"

namespace opo::mc {

namespace {
constexpr std::uint64_t kDetectorStreamId = 11;
constexpr std::uint64_t kSplitStreamId = 13;
} // namespace

void TagStream::validate() const {
  if (!(duration_s >= 0.0)) throw DomainError("tag stream '" + channel + "': negative duration");
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    const double t = timestamps[i];
    if (!(t >= 0.0 && t <= duration_s)) throw DomainError("tag stream '" + channel + "': timestamp outside [0, duration]");
    if (i > 0 && !(t > timestamps[i - 1])) {
      throw DomainError("tag stream '" + channel + "': timestamps not strictly increasing at index " +
                        std::to_string(i));
    }
  }
}

bool Gate::is_open(double t) const {
  double x = std::fmod(t - phase_s, period_s);
  if (x < 0.0) x += period_s;
  return x < width_s;
}

void DetectorModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw DomainError("detector efficiency must lie in (0, 1]");
  if (!(jitter_sigma_s >= 0.0)) throw DomainError("detector jitter must be non-negative");
  if (!(dead_time_s >= 0.0)) throw DomainError("detector dead time must be non-negative");
  if (!(dark_rate_hz >= 0.0)) throw DomainError("detector dark rate must be non-negative");
  if (gate) {
    if (!(gate->period_s > 0.0 && gate->width_s > 0.0)) throw DomainError("gate period and width must be positive");
    if (gate->width_s > gate->period_s) throw DomainError("gate width must not exceed the gate period");
  }
}

TagStream apply_detector(const TagStream& stream, const DetectorModel& model, std::uint64_t seed) {
  DetectorState state;
  return apply_detector(stream, model, seed, state);
}

TagStream apply_detector(const TagStream& stream, const DetectorModel& model, std::uint64_t seed,
                         DetectorState& state) {
  model.validate();
  auto engine = make_engine(seed, kDetectorStreamId);
  std::bernoulli_distribution detected(model.efficiency);

  std::vector<double> clicks;
  clicks.reserve(static_cast<std::size_t>(static_cast<double>(stream.timestamps.size()) * model.efficiency) + 16);
  for (double t : stream.timestamps) {
    if (model.gate && !model.gate->is_open(t)) continue;
    if (detected(engine)) clicks.push_back(t);
  }

  if (model.dark_rate_hz > 0.0) {
    std::exponential_distribution<double> gap(model.dark_rate_hz);
    for (double t = gap(engine); t < stream.duration_s; t += gap(engine)) {
      if (!model.gate || model.gate->is_open(t)) clicks.push_back(t);
    }
  }

  if (model.jitter_sigma_s > 0.0) {
    std::normal_distribution<double> jitter(0.0, model.jitter_sigma_s);
    for (double& t : clicks) t += jitter(engine);
    std::erase_if(clicks, [&](double t) { return t < 0.0 || t > stream.duration_s; });
  }
  std::sort(clicks.begin(), clicks.end());

  TagStream out{stream.channel, {}, stream.duration_s, seed, stream.provenance + " | detector"};
  out.timestamps.reserve(clicks.size());
  std::optional<double> last = state.last_click_s;
  for (double t : clicks) {
    if (last && (t <= *last || t - *last < model.dead_time_s)) continue;
    out.timestamps.push_back(t);
    last = t;
  }
  state.last_click_s = last ? std::optional<double>(*last - stream.duration_s) : std::nullopt;
  return out;
}

std::pair<TagStream, TagStream> split_stream(const TagStream& stream, double fraction_a, std::uint64_t seed) {
  if (!(fraction_a >= 0.0 && fraction_a <= 1.0)) throw DomainError("split_stream: fraction must lie in [0, 1]");
  auto engine = make_engine(seed, kSplitStreamId);
  std::bernoulli_distribution to_a(fraction_a);
  TagStream a{stream.channel + ".a", {}, stream.duration_s, seed, stream.provenance + " | split"};
  TagStream b{stream.channel + ".b", {}, stream.duration_s, seed, stream.provenance + " | split"};
  for (double t : stream.timestamps) (to_a(engine) ? a : b).timestamps.push_back(t);
  return {std::move(a), std::move(b)};
}

} // namespace opo::mc
