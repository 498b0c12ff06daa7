#include "opo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "opo/constants.hpp"
#include "opo/errors.hpp"

namespace opo {

namespace {

enum class Kind { number, integer, boolean, text, list };

struct KeySpec {
  std::string_view key;
  Kind kind = Kind::number;
  double scale = 1.0;  ///< value in SI = raw * scale + offset
  double offset = 0.0;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool min_exclusive = false;
  std::string_view fallback; ///< empty: required (numbers) or no default
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Section "detector" stands for every [detector.NAME] block.
const std::map<std::string_view, std::vector<KeySpec>>& schema() {
  static const std::map<std::string_view, std::vector<KeySpec>> s{
      {"source",
       {{"cavity_length_mm", Kind::number, 1e-3, 0.0, 0.0, kInf, true, ""},
        {"temperature_c", Kind::number, 1.0, kZeroCelsius, -kZeroCelsius, kInf, true, ""},
        {"pump_wavelength_nm", Kind::number, 1e-9, 0.0, 0.0, kInf, true, ""},
        {"pump_power_mw", Kind::number, 1e-3, 0.0, 0.0, kInf, true, ""},
        {"spacer_expansion_per_k", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"gouy_phase", Kind::boolean, 1.0, 0.0, -kInf, kInf, false, "false"}}},
      {"crystal",
       {{"length_mm", Kind::number, 1e-3, 0.0, 0.0, kInf, false, ""},
        {"poling_period_um", Kind::number, 1e-6, 0.0, 0.0, kInf, true, ""},
        {"transmission", Kind::number, 1.0, 0.0, 0.0, 1.0, true, ""},
        {"thermal_expansion_per_k", Kind::number, 1.0, 0.0, -kInf, kInf, false, "1.54e-5"}}},
      {"dispersion",
       {{"label", Kind::text, 1.0, 0.0, -kInf, kInf, false, "unnamed"},
        {"a1", Kind::number, 1.0, 0.0, 1.0, kInf, true, ""},
        {"a2", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"a3", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"a4", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"a5", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"a6", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"b1", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"b2", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"b3", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"b4", Kind::number, 1.0, 0.0, -kInf, kInf, false, "0"},
        {"f_ref_c", Kind::number, 1.0, 0.0, -kInf, kInf, false, "24.5"},
        {"f_offset_c", Kind::number, 1.0, 0.0, -kInf, kInf, false, "570.82"},
        {"wavelength_min_um", Kind::number, 1e-6, 0.0, 0.0, kInf, true, "0.5"},
        {"wavelength_max_um", Kind::number, 1e-6, 0.0, 0.0, kInf, true, "4"},
        {"temperature_min_c", Kind::number, 1.0, kZeroCelsius, -kZeroCelsius, kInf, false, "20"},
        {"temperature_max_c", Kind::number, 1.0, kZeroCelsius, -kZeroCelsius, kInf, false, "200"}}},
      {"flat_mirror", {{"reflectivity", Kind::number, 1.0, 0.0, 0.0, 1.0, true, ""}}},
      {"concave_mirror",
       {{"reflectivity", Kind::number, 1.0, 0.0, 0.0, 1.0, true, ""},
        {"focal_length_mm", Kind::number, 1e-3, 0.0, 0.0, kInf, true, ""}}},
      {"grid",
       {{"anchor_thz", Kind::number, 1e12, 0.0, 0.0, kInf, true, "193.1"},
        {"spacing_ghz", Kind::number, 1e9, 0.0, 0.0, kInf, true, "25"}}},
      {"detector",
       {{"efficiency", Kind::number, 1.0, 0.0, 0.0, 1.0, true, ""},
        {"jitter_ps", Kind::number, 1e-12, 0.0, 0.0, kInf, false, "0"},
        {"dead_time_us", Kind::number, 1e-6, 0.0, 0.0, kInf, false, "0"},
        {"dark_rate_hz", Kind::number, 1.0, 0.0, 0.0, kInf, false, "0"},
        {"gate_period_ns", Kind::number, 1e-9, 0.0, 0.0, kInf, true, ""},
        {"gate_width_ns", Kind::number, 1e-9, 0.0, 0.0, kInf, true, ""},
        {"gate_phase_ns", Kind::number, 1e-9, 0.0, -kInf, kInf, false, "0"}}},
      {"simulation",
       {{"duration_s", Kind::number, 1.0, 0.0, 0.0, kInf, true, "100"},
        {"bin_width_ps", Kind::number, 1e-12, 0.0, 0.0, kInf, true, "100"},
        {"t_max_ns", Kind::number, 1e-9, 0.0, 0.0, kInf, true, "20"},
        {"event_cap", Kind::integer, 1.0, 0.0, 1.0, kInf, false, "500000000"},
        {"photon_bandwidth_mhz", Kind::number, 1e6, 0.0, 0.0, kInf, true, "116"},
        {"start_detector", Kind::text, 1.0, 0.0, -kInf, kInf, false, "d1"},
        {"stop_detector", Kind::text, 1.0, 0.0, -kInf, kInf, false, "d2"},
        {"chunk_s", Kind::number, 1.0, 0.0, 0.0, kInf, true, "1"},
        {"fit_exclude_ns", Kind::number, 1e-9, 0.0, 0.0, kInf, false, "1.5"},
        {"floor_fraction", Kind::number, 1.0, 0.0, 0.0, 1.0, true, "0.2"}}},
      {"rates",
       {{"brightness_per_s_mw_mhz", Kind::number, 1.0, 0.0, 0.0, kInf, false, "134"},
        {"enhancement_factor", Kind::number, 1.0, 0.0, 0.0, kInf, false, "500"}}},
      {"thermal",
       {{"mode_weights", Kind::list, 1.0, 0.0, 0.0, kInf, false, "1"},
        {"bandwidth_mhz", Kind::number, 1e6, 0.0, 0.0, kInf, true, "116"},
        {"mean_rate_hz", Kind::number, 1.0, 0.0, 0.0, kInf, true, "1000000"},
        {"duration_s", Kind::number, 1.0, 0.0, 0.0, kInf, true, "0.1"},
        {"bin_width_ps", Kind::number, 1e-12, 0.0, 0.0, kInf, true, "100"},
        {"t_max_ns", Kind::number, 1e-9, 0.0, 0.0, kInf, true, "40"},
        {"split_fraction", Kind::number, 1.0, 0.0, 0.0, 1.0, true, "0.5"},
        {"detector_a", Kind::text, 1.0, 0.0, -kInf, kInf, false, ""},
        {"detector_b", Kind::text, 1.0, 0.0, -kInf, kInf, false, ""}}},
      {"output",
       {{"format", Kind::text, 1.0, 0.0, -kInf, kInf, false, "json"},
        {"path", Kind::text, 1.0, 0.0, -kInf, kInf, false, "-"},
        {"spectrometer_resolution_nm", Kind::number, 1e-9, 0.0, 0.0, kInf, true, "0.5"}}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::string_view kind; ///< schema key
  int line = 0;
  std::map<std::string, Entry> entries;
};

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string_view unit_base(std::string_view key) {
  const auto pos = key.rfind('_');
  return pos == std::string_view::npos ? key : key.substr(0, pos);
}

const KeySpec* find_key(std::string_view kind, std::string_view key) {
  for (const auto& spec : schema().at(kind)) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

void check_key(const Section& section, const std::string& key, int line) {
  if (find_key(section.kind, key)) return;
  const auto base = unit_base(key);
  if (base != key) {
    for (const auto& spec : schema().at(section.kind)) {
      if (unit_base(spec.key) == base && spec.key != key) {
        throw ConfigError(line, "unit suffix mismatch in [" + section.name + "]: '" + key + "' should be '" +
                                    std::string(spec.key) + "'");
      }
    }
  }
  throw ConfigError(line, "unknown key '" + key + "' in [" + section.name + "]");
}

std::vector<Section> lex(std::string_view text) {
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(number, "malformed section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      std::string_view kind = name;
      if (name.rfind("detector.", 0) == 0 && name.size() > 9) kind = "detector";
      const auto it = schema().find(kind);
      if (it == schema().end()) throw ConfigError(number, "unknown section [" + name + "]");
      for (const auto& s : sections) {
        if (s.name == name) throw ConfigError(number, "duplicate section [" + name + "]");
      }
      sections.push_back(Section{name, it->first, number, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(number, "expected 'key = value'");
    if (sections.empty()) throw ConfigError(number, "key outside of any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(number, "empty key");
    if (value.empty()) throw ConfigError(number, "empty value for '" + key + "'");
    auto& section = sections.back();
    check_key(section, key, number);
    if (!section.entries.emplace(key, Entry{value, number}).second) {
      throw ConfigError(number, "duplicate key '" + key + "' in [" + section.name + "]");
    }
  }
  return sections;
}

class Reader {
public:
  Reader(const Section* section, std::string name, std::vector<std::string>& provenance)
      : section_(section), name_(std::move(name)), provenance_(provenance) {}

  bool present() const { return section_ != nullptr; }
  bool has(std::string_view key) const { return section_ && section_->entries.count(std::string(key)) > 0; }

  double number(std::string_view key) const {
    const KeySpec& spec = spec_for(key);
    const auto [text, line] = raw(spec);
    double raw_value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, raw_value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(raw_value)) {
      throw ConfigError(line, "'" + std::string(key) + "' expects a number, got '" + text + "'");
    }
    const bool low = spec.min_exclusive ? !(raw_value > spec.min) : !(raw_value >= spec.min);
    if (low || raw_value > spec.max) {
      std::ostringstream os;
      os << "'" << key << "' = " << text << " out of range " << (spec.min_exclusive ? "(" : "[") << spec.min << ", "
         << spec.max << "]";
      throw ConfigError(line, os.str());
    }
    return raw_value * spec.scale + spec.offset;
  }

  std::uint64_t integer(std::string_view key) const {
    const KeySpec& spec = spec_for(key);
    const auto [text, line] = raw(spec);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || static_cast<double>(value) < spec.min) {
      throw ConfigError(line, "'" + std::string(key) + "' expects a positive integer, got '" + text + "'");
    }
    return value;
  }

  bool boolean(std::string_view key) const {
    const KeySpec& spec = spec_for(key);
    const auto [text, line] = raw(spec);
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    throw ConfigError(line, "'" + std::string(key) + "' expects true/false, got '" + text + "'");
  }

  std::string text(std::string_view key) const { return raw(spec_for(key)).first; }

  std::vector<double> list(std::string_view key) const {
    const KeySpec& spec = spec_for(key);
    const auto [text, line] = raw(spec);
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !(v >= spec.min)) {
        throw ConfigError(line, "'" + std::string(key) + "' expects a comma-separated list of non-negative numbers");
      }
      out.push_back(v);
    }
    return out;
  }

  int line_of(std::string_view key) const {
    if (!has(key)) return section_ ? section_->line : 0;
    return section_->entries.at(std::string(key)).line;
  }

private:
  const KeySpec& spec_for(std::string_view key) const {
    const KeySpec* spec = find_key(kind(), key);
    if (!spec) throw Error("internal: key '" + std::string(key) + "' missing from schema");
    return *spec;
  }

  std::string_view kind() const {
    return name_.rfind("detector.", 0) == 0 ? std::string_view("detector") : std::string_view(name_);
  }

  std::pair<std::string, int> raw(const KeySpec& spec) const {
    if (section_) {
      const auto it = section_->entries.find(std::string(spec.key));
      if (it != section_->entries.end()) return {it->second.value, it->second.line};
    }
    if (spec.fallback.empty() && spec.kind != Kind::text) {
      throw ConfigError(section_ ? section_->line : 0,
                        "missing required key '" + std::string(spec.key) + "' in [" + name_ + "]");
    }
    provenance_.push_back(name_ + "." + std::string(spec.key) + " = " + std::string(spec.fallback) + " (default)");
    return {std::string(spec.fallback), section_ ? section_->line : 0};
  }

  const Section* section_;
  std::string name_;
  std::vector<std::string>& provenance_;
};

} // namespace

const mc::DetectorModel& RunConfig::detector(const std::string& name) const {
  const auto it = detectors.find(name);
  if (it == detectors.end()) throw ConfigError(0, "missing block [detector." + name + "]");
  return it->second;
}

RunConfig parse_config(std::string_view text) {
  const auto sections = lex(text);
  auto find = [&](std::string_view name) -> const Section* {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };
  for (std::string_view required : {"source", "crystal", "dispersion", "flat_mirror", "concave_mirror"}) {
    if (!find(required)) throw ConfigError(0, "missing block [" + std::string(required) + "]");
  }

  RunConfig cfg;
  cfg.text = std::string(text);
  auto reader = [&](std::string_view name) { return Reader(find(name), std::string(name), cfg.provenance); };

  const auto dispersion = reader("dispersion");
  auto& coeffs = cfg.source.crystal.dispersion;
  coeffs.label = dispersion.text("label");
  coeffs.a1 = dispersion.number("a1");
  coeffs.a2 = dispersion.number("a2");
  coeffs.a3 = dispersion.number("a3");
  coeffs.a4 = dispersion.number("a4");
  coeffs.a5 = dispersion.number("a5");
  coeffs.a6 = dispersion.number("a6");
  coeffs.b1 = dispersion.number("b1");
  coeffs.b2 = dispersion.number("b2");
  coeffs.b3 = dispersion.number("b3");
  coeffs.b4 = dispersion.number("b4");
  coeffs.f_ref_c = dispersion.number("f_ref_c");
  coeffs.f_offset_c = dispersion.number("f_offset_c");
  auto& window = cfg.source.crystal.window;
  window.wavelength_min_m = dispersion.number("wavelength_min_um");
  window.wavelength_max_m = dispersion.number("wavelength_max_um");
  window.temperature_min_k = dispersion.number("temperature_min_c");
  window.temperature_max_k = dispersion.number("temperature_max_c");
  if (!(window.wavelength_min_m < window.wavelength_max_m)) {
    throw ConfigError(dispersion.line_of("wavelength_max_um"), "dispersion wavelength window is empty");
  }
  if (!(window.temperature_min_k < window.temperature_max_k)) {
    throw ConfigError(dispersion.line_of("temperature_max_c"), "dispersion temperature window is empty");
  }

  const auto crystal = reader("crystal");
  cfg.source.crystal.length_m = crystal.number("length_mm");
  cfg.source.crystal.poling_period_m = crystal.number("poling_period_um");
  cfg.source.crystal.transmission = crystal.number("transmission");
  cfg.source.crystal.thermal_expansion_per_k = crystal.number("thermal_expansion_per_k");

  const auto flat = reader("flat_mirror");
  cfg.source.flat_mirror = MirrorSpec{flat.number("reflectivity"), MirrorGeometry::flat, 0.0};
  const auto concave = reader("concave_mirror");
  cfg.source.concave_mirror =
      MirrorSpec{concave.number("reflectivity"), MirrorGeometry::concave, concave.number("focal_length_mm")};

  const auto source = reader("source");
  cfg.source.physical_length_m = source.number("cavity_length_mm");
  cfg.source.temperature_k = source.number("temperature_c");
  cfg.source.pump_wavelength_m = source.number("pump_wavelength_nm");
  cfg.source.pump_power_w = source.number("pump_power_mw");
  cfg.source.spacer_expansion_per_k = source.number("spacer_expansion_per_k");
  cfg.source.gouy_phase = source.boolean("gouy_phase");
  try {
    check_window(cfg.source.crystal, 2.0 * cfg.source.pump_wavelength_m, cfg.source.temperature_k);
    cfg.source.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source.line_of("cavity_length_mm"), std::string("invalid source: ") + e.what());
  }

  const auto grid = reader("grid");
  cfg.grid.anchor_hz = grid.number("anchor_thz");
  cfg.grid.spacing_hz = grid.number("spacing_ghz");

  for (const auto& s : sections) {
    if (s.kind != "detector") continue;
    const Reader d(&s, s.name, cfg.provenance);
    mc::DetectorModel model;
    model.efficiency = d.number("efficiency");
    model.jitter_sigma_s = d.number("jitter_ps");
    model.dead_time_s = d.number("dead_time_us");
    model.dark_rate_hz = d.number("dark_rate_hz");
    if (d.has("gate_period_ns") || d.has("gate_width_ns")) {
      model.gate = mc::Gate{d.number("gate_period_ns"), d.number("gate_width_ns"), d.number("gate_phase_ns")};
      if (model.gate->width_s > model.gate->period_s) {
        throw ConfigError(d.line_of("gate_width_ns"), "gate width exceeds gate period");
      }
    }
    cfg.detectors.emplace(s.name.substr(9), model);
  }

  const auto sim = reader("simulation");
  auto& simulation = cfg.simulation;
  simulation.duration_s = sim.number("duration_s");
  simulation.bin_width_s = sim.number("bin_width_ps");
  simulation.t_max_s = sim.number("t_max_ns");
  simulation.event_cap = sim.integer("event_cap");
  simulation.photon_bandwidth_hz = sim.number("photon_bandwidth_mhz");
  simulation.start_detector = sim.text("start_detector");
  simulation.stop_detector = sim.text("stop_detector");
  simulation.chunk_s = sim.number("chunk_s");
  simulation.fit_exclude_center_s = sim.number("fit_exclude_ns");
  simulation.floor_fraction = sim.number("floor_fraction");
  for (std::string_view key : {"start_detector", "stop_detector"}) {
    if (sim.has(key) && !cfg.detectors.count(sim.text(key))) {
      throw ConfigError(sim.line_of(key), "missing block [detector." + sim.text(key) + "]");
    }
  }
  try {
    (void)mc::CoincidenceHistogram::empty(simulation.bin_width_s, simulation.t_max_s);
  } catch (const DomainError& e) {
    throw ConfigError(sim.line_of("t_max_ns"), e.what());
  }

  const auto rates = reader("rates");
  cfg.rates.brightness = rates.number("brightness_per_s_mw_mhz");
  cfg.rates.enhancement_factor = rates.number("enhancement_factor");

  const auto thermal = reader("thermal");
  auto& th = cfg.thermal;
  th.mode_weights = thermal.list("mode_weights");
  th.bandwidth_hz = thermal.number("bandwidth_mhz");
  th.mean_rate_hz = thermal.number("mean_rate_hz");
  th.duration_s = thermal.number("duration_s");
  th.bin_width_s = thermal.number("bin_width_ps");
  th.t_max_s = thermal.number("t_max_ns");
  th.split_fraction = thermal.number("split_fraction");
  th.detector_a = thermal.text("detector_a");
  th.detector_b = thermal.text("detector_b");
  for (const auto* name : {&th.detector_a, &th.detector_b}) {
    if (!name->empty() && !cfg.detectors.count(*name)) {
      throw ConfigError(thermal.line_of(name == &th.detector_a ? "detector_a" : "detector_b"),
                        "missing block [detector." + *name + "]");
    }
  }

  const auto output = reader("output");
  cfg.output.format = output.text("format");
  if (cfg.output.format != "json" && cfg.output.format != "csv") {
    throw ConfigError(output.line_of("format"), "output format must be json or csv");
  }
  cfg.output.path = output.text("path");
  cfg.output.spectrometer_resolution_m = output.number("spectrometer_resolution_nm");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

} // namespace opo
