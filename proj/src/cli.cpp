#include "opo/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <sstream>

#include "opo/cavity.hpp"
#include "opo/cluster.hpp"
#include "opo/config.hpp"
#include "opo/constants.hpp"
#include "opo/dispersion.hpp"
#include "opo/dwdm.hpp"
#include "opo/errors.hpp"
#include "opo/mc.hpp"
#include "opo/spdc.hpp"
#include "opo/stats.hpp"

namespace opo::cli {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::pair<double, double> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw ConfigError(0, std::string(flag) + " expects A:B, got '" + text + "'");
    }
    return v;
  };
  if (colon == std::string::npos) throw ConfigError(0, std::string(flag) + " expects A:B, got '" + text + "'");
  const std::string_view view(text);
  const double a = parse(view.substr(0, colon));
  const double b = parse(view.substr(colon + 1));
  if (!(a < b)) throw ConfigError(0, std::string(flag) + " needs A < B");
  return {a, b};
}

/// A flat table for CSV output; JSON output receives it as an array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

struct Options {
  std::string config_path = std::string(OPO_CONFIG_DIR) + "/paper.cfg";
  std::optional<std::uint64_t> seed;
  std::string format;
  std::string out;
  std::string band_nm;
  std::string t_range_c;
  std::string length_mm;
  std::optional<double> duration_s;
  std::optional<double> target_ghz;
  std::optional<double> step;
  bool per_mode = false;
};

struct Result {
  json report = json::object(); ///< JSON body
  std::optional<Table> table;   ///< CSV body; JSON embeds it under `table_key`
  std::string table_key = "rows";
  std::vector<std::pair<std::string, std::string>> csv_extra; ///< extra `#` header lines
  std::string csv_raw;                                         ///< preformatted CSV body, overrides table
};

json provenance(const RunConfig& cfg, const Options& opt, const std::string& command,
                const std::vector<std::string>& args) {
  std::string invocation;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" || args[i] == "--config") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0 || args[i].rfind("--config=", 0) == 0) continue;
    if (!invocation.empty()) invocation += ' ';
    invocation += args[i];
  }
  json p = json::object();
  p["tool_version"] = kToolVersion;
  p["command"] = command;
  p["invocation"] = invocation;
  p["config_sha256"] = sha256_hex(cfg.text);
  p["seed"] = opt.seed ? json(*opt.seed) : json(nullptr);
  p["poling_period_um"] = cfg.source.crystal.poling_period_m * 1e6;
  p["dispersion"] = cfg.source.crystal.dispersion.label;
  p["defaults"] = cfg.provenance;
  return p;
}

double degenerate_m(const RunConfig& cfg) { return 2.0 * cfg.source.pump_wavelength_m; }

PumpSpec pump_of(const RunConfig& cfg) {
  return PumpSpec::from_wavelength(cfg.source.pump_wavelength_m, cfg.source.pump_power_w);
}

std::pair<double, double> band_hz(const Options& opt, double lo_nm, double hi_nm) {
  auto [a, b] = opt.band_nm.empty() ? std::pair{lo_nm, hi_nm} : parse_range(opt.band_nm, "--band-nm");
  if (!(a > 0.0)) throw ConfigError(0, "--band-nm must be positive");
  return {wavelength_to_frequency(b * 1e-9), wavelength_to_frequency(a * 1e-9)};
}

std::uint64_t require_seed(const Options& opt, const std::string& command) {
  if (!opt.seed) throw ConfigError(0, "'" + command + "' is stochastic and requires --seed");
  return *opt.seed;
}

Result cmd_index(const RunConfig& cfg, const Options& opt) {
  const auto [lo_hz, hi_hz] = band_hz(opt, 1500.0, 1620.0);
  const double step_nm = opt.step.value_or(5.0);
  if (!(step_nm > 0.0)) throw ConfigError(0, "--step must be positive");
  const double lo_nm = frequency_to_wavelength(hi_hz) * 1e9;
  const double hi_nm = frequency_to_wavelength(lo_hz) * 1e9;
  const double t = cfg.source.temperature_k;
  const auto& crystal = cfg.source.crystal;
  Table table{{"wavelength_nm", "n", "n_group"}, {}};
  const auto count = static_cast<long>(std::floor((hi_nm - lo_nm) / step_nm + 1e-9));
  for (long i = 0; i <= count; ++i) {
    const double lambda = (lo_nm + static_cast<double>(i) * step_nm) * 1e-9;
    table.rows.push_back({lambda * 1e9, refractive_index(lambda, t, crystal), group_index(lambda, t, crystal)});
  }
  Result r;
  r.report["dispersion"] = crystal.dispersion.label;
  r.report["temperature_c"] = kelvin_to_celsius(t);
  const double lp = cfg.source.pump_wavelength_m;
  r.report["pump"] = {{"wavelength_nm", lp * 1e9},
                      {"n", refractive_index(lp, t, crystal)},
                      {"n_group", group_index(lp, t, crystal)}};
  r.csv_extra = {{"temperature_c", num(kelvin_to_celsius(t))}};
  r.table = std::move(table);
  return r;
}

Result cmd_cavity(const RunConfig& cfg, const Options&) {
  const auto& src = cfg.source;
  const double lambda = degenerate_m(cfg);
  const double f = fsr(src, lambda);
  const double phase_fsr = kSpeedOfLight / (2.0 * optical_length(src, lambda, IndexKind::phase));
  const double fin = finesse(src);
  const double df = linewidth(src, lambda);
  const double tau = coherence_time(df);
  std::vector<std::pair<std::string, double>> values{
      {"wavelength_nm", lambda * 1e9},
      {"fsr_ghz", f * 1e-9},
      {"fsr_nm", frequency_span_to_wavelength(f, lambda) * 1e9},
      {"fsr_phase_index_ghz", phase_fsr * 1e-9},
      {"round_trip_factor", round_trip_factor(src)},
      {"finesse", fin},
      {"linewidth_mhz", df * 1e-6},
      {"coherence_ns", tau * 1e9},
      {"waist_um", mode_waist(src, lambda) * 1e6},
      {"escape_probability", escape_probability(src)},
      {"peak_transmission", peak_transmission(src)},
      {"optical_length_mm", optical_length(src, lambda, IndexKind::group) * 1e3},
      {"gouy_phase_rad", gouy_phase(src, lambda)},
  };
  Result r;
  Table table{{"quantity", "value"}, {}};
  std::ostringstream csv;
  csv << "quantity,value\n";
  for (const auto& [key, value] : values) {
    r.report[key] = value;
    csv << key << ',' << num(value) << '\n';
  }
  r.report["waist_location"] = "flat_mirror";
  csv << "waist_location,flat_mirror\n";
  r.csv_raw = csv.str();
  return r;
}

Result cmd_scan(const RunConfig& cfg, const Options& opt) {
  const double center_nm = degenerate_m(cfg) * 1e9;
  const auto [lo_hz, hi_hz] = band_hz(opt, center_nm - 0.6, center_nm + 0.6);
  const double df = linewidth(cfg.source, frequency_to_wavelength(0.5 * (lo_hz + hi_hz)));
  const double step_hz = opt.step ? *opt.step * 1e6 : df / 10.0;
  const auto samples = transmission_scan(cfg.source, lo_hz, hi_hz, step_hz);
  Table table{{"wavelength_nm", "frequency_hz", "transmission"}, {}};
  table.rows.reserve(samples.size());
  for (const auto& s : samples) {
    table.rows.push_back({frequency_to_wavelength(s.frequency_hz) * 1e9, s.frequency_hz, s.transmission});
  }
  Result r;
  r.report["step_mhz"] = step_hz * 1e-6;
  r.report["linewidth_mhz"] = df * 1e-6;
  r.report["peak_transmission"] = peak_transmission(cfg.source);
  r.table = std::move(table);
  return r;
}

Result cmd_spectrum(const RunConfig& cfg, const Options& opt) {
  const auto [lo_hz, hi_hz] = band_hz(opt, 1500.0, 1625.0);
  const auto spectrum = cluster_spectrum(cfg.source, pump_of(cfg), lo_hz, hi_hz);
  const auto envelopes = cluster_envelopes(spectrum, 0.5);
  Result r;
  r.report["temperature_c"] = kelvin_to_celsius(spectrum.temperature_k);
  r.report["fsr_ghz"] = spectrum.fsr_hz * 1e-9;
  r.report["linewidth_mhz"] = spectrum.linewidth_hz * 1e-6;
  r.report["contributing_mode_pairs"] = spectrum.contributing_mode_pairs.size();
  json env = json::array();
  const double lambda_c = degenerate_m(cfg);
  for (const auto& e : envelopes) {
    json item = {{"center_nm", frequency_to_wavelength(e.center_hz) * 1e9},
                 {"width_nm", frequency_span_to_wavelength(e.width_hz, lambda_c) * 1e9},
                 {"integrated_weight", e.integrated_weight}};
    item["partner"] = e.partner ? json(*e.partner) : json(nullptr);
    env.push_back(std::move(item));
  }
  r.report["clusters"] = std::move(env);

  const double resolution = cfg.output.spectrometer_resolution_m;
  if (opt.per_mode || !(resolution > 0.0)) {
    Table table{{"wavelength_nm", "frequency_hz", "density"}, {}};
    for (const auto& s : spectrum.samples) {
      table.rows.push_back({frequency_to_wavelength(s.signal_hz) * 1e9, s.signal_hz, s.density});
    }
    r.table = std::move(table);
    r.table_key = "modes";
  } else {
    const auto rendered = render_spectrum(spectrum, resolution, resolution / 10.0);
    Table table{{"wavelength_nm", "intensity"}, {}};
    for (const auto& s : rendered) table.rows.push_back({s.wavelength_m * 1e9, s.intensity});
    r.report["spectrometer_resolution_nm"] = resolution * 1e9;
    r.csv_extra = {{"spectrometer_resolution_nm", num(resolution * 1e9)}};
    r.table = std::move(table);
    r.table_key = "rendered";
  }
  return r;
}

Result cmd_tuning(const RunConfig& cfg, const Options& opt) {
  const double t0 = kelvin_to_celsius(cfg.source.temperature_k);
  auto [a, b] = opt.t_range_c.empty() ? std::pair{t0 - 10.0, t0 + 10.0} : parse_range(opt.t_range_c, "--t-range-c");
  const double step = opt.step.value_or(0.5);
  if (!(step > 0.0)) throw ConfigError(0, "--step must be positive");
  const auto curve = tuning_curve(pump_of(cfg), cfg.source.crystal, celsius_to_kelvin(a), celsius_to_kelvin(b), step);
  Table table{{"temperature_c", "signal_nm", "idler_nm", "separation_nm"}, {}};
  for (const auto& p : curve) {
    table.rows.push_back(
        {kelvin_to_celsius(p.temperature_k), p.signal_peak_m * 1e9, p.idler_peak_m * 1e9, p.separation_m() * 1e9});
  }
  const auto pm = phasematch_temperature(pump_of(cfg), cfg.source.crystal);
  Result r;
  r.report["degenerate_temperature_c"] = kelvin_to_celsius(pm.temperature_k);
  r.report["phase_matched"] = pm.phase_matched;
  r.table = std::move(table);
  return r;
}

json fit_json(const mc::BandwidthFit& fit) {
  return {{"bandwidth_mhz", fit.bandwidth_hz * 1e-6},
          {"standard_error_mhz", fit.standard_error_hz * 1e-6},
          {"left_bandwidth_mhz", fit.left_bandwidth_hz * 1e-6},
          {"right_bandwidth_mhz", fit.right_bandwidth_hz * 1e-6},
          {"asymmetry", fit.asymmetry},
          {"floor_counts", fit.floor_counts},
          {"peak_counts", fit.peak_counts},
          {"excluded_bins", fit.excluded_bins}};
}

Result cmd_coincidence(const RunConfig& cfg, const Options& opt) {
  const auto seed = require_seed(opt, "coincidence");
  const auto& sim = cfg.simulation;
  mc::CoincidenceExperiment exp;
  exp.pair_rate_hz = pair_rate(Brightness{cfg.rates.brightness}, cfg.source.pump_power_w, sim.photon_bandwidth_hz);
  exp.bandwidth_hz = sim.photon_bandwidth_hz;
  exp.duration_s = opt.duration_s.value_or(sim.duration_s);
  if (!(exp.duration_s > 0.0)) throw ConfigError(0, "--duration-s must be positive");
  exp.start_detector = cfg.detector(sim.start_detector);
  exp.stop_detector = cfg.detector(sim.stop_detector);
  exp.bin_width_s = sim.bin_width_s;
  exp.t_max_s = sim.t_max_s;
  exp.chunk_s = sim.chunk_s;
  exp.seed = seed;
  exp.limits.event_cap = sim.event_cap;
  const auto result = mc::run_coincidence_experiment(exp);

  mc::FitOptions fit_opt;
  fit_opt.floor_fraction = sim.floor_fraction;
  fit_opt.exclude_center_s = sim.fit_exclude_center_s;
  Result r;
  r.report["pair_rate_hz"] = exp.pair_rate_hz;
  r.report["duration_s"] = exp.duration_s;
  r.report["pairs_emitted"] = result.pairs_emitted;
  r.report["start_clicks"] = result.start_clicks;
  r.report["stop_clicks"] = result.stop_clicks;
  r.report["coincidences"] = result.histogram.total();
  r.report["configured_bandwidth_mhz"] = sim.photon_bandwidth_hz * 1e-6;
  try {
    const auto fit = mc::fit_bandwidth(result.histogram, fit_opt);
    r.report["fit"] = fit_json(fit);
    r.report["relative_error"] = fit.bandwidth_hz / sim.photon_bandwidth_hz - 1.0;
    r.report["noise_to_signal"] = mc::noise_to_signal(result.histogram, fit_opt);
  } catch (const NumericalError& e) {
    r.report["fit"] = nullptr;
    r.report["fit_error"] = e.what();
  }
  std::ostringstream csv;
  mc::write_histogram_csv(csv, result.histogram);
  r.csv_raw = csv.str();
  json hist = json::object();
  hist["bin_width_ps"] = result.histogram.bin_width_s * 1e12;
  hist["t_max_ns"] = result.histogram.t_max_s * 1e9;
  hist["counts"] = result.histogram.counts;
  r.report["histogram"] = std::move(hist);
  return r;
}

Result cmd_g2(const RunConfig& cfg, const Options& opt) {
  const auto seed = require_seed(opt, "g2");
  const auto& th = cfg.thermal;
  const double duration = opt.duration_s.value_or(th.duration_s);
  if (!(duration > 0.0)) throw ConfigError(0, "--duration-s must be positive");
  mc::StreamLimits limits;
  limits.event_cap = cfg.simulation.event_cap;
  auto sub_seed = [&](std::uint64_t id) { return mc::make_engine(seed, id)(); };
  const auto clicks =
      mc::thermal_click_stream(th.mode_weights, th.bandwidth_hz, th.mean_rate_hz, duration, sub_seed(200), limits);
  auto [a, b] = mc::split_stream(clicks, th.split_fraction, sub_seed(201));
  if (!th.detector_a.empty()) a = mc::apply_detector(a, cfg.detector(th.detector_a), sub_seed(202));
  if (!th.detector_b.empty()) b = mc::apply_detector(b, cfg.detector(th.detector_b), sub_seed(203));
  const auto est = mc::estimate_g2(a, b, th.bin_width_s, th.t_max_s);

  const double sum = std::accumulate(th.mode_weights.begin(), th.mode_weights.end(), 0.0);
  const double sum_sq = std::inner_product(th.mode_weights.begin(), th.mode_weights.end(), th.mode_weights.begin(), 0.0);
  Result r;
  r.report["clicks"] = clicks.timestamps.size();
  r.report["clicks_a"] = a.timestamps.size();
  r.report["clicks_b"] = b.timestamps.size();
  r.report["configured_effective_modes"] = sum * sum / sum_sq;
  r.report["plateau_counts"] = est.plateau;
  r.report["g2_zero"] = est.g2_zero;
  r.report["g2_zero_error"] = est.g2_zero_error;
  try {
    const auto n = modes_from_g2(Estimate{est.g2_zero, est.g2_zero_error});
    r.report["modes"] = n.value;
    r.report["modes_error"] = n.sigma;
  } catch (const DomainError& e) {
    r.report["modes"] = nullptr;
    r.report["modes_error"] = nullptr;
    r.report["modes_note"] = e.what();
  }
  Table table{{"delay_s", "g2", "g2_error"}, {}};
  for (std::size_t i = 0; i < est.delay_s.size(); ++i) table.rows.push_back({est.delay_s[i], est.g2[i], est.g2_error[i]});
  r.table = std::move(table);
  r.table_key = "curve";
  return r;
}

/// Physical length whose group-index FSR equals `spacing_hz` at the source temperature.
double closed_form_length(const SourceSpec& src, double spacing_hz, double wavelength_m) {
  const double ng = group_index(wavelength_m, src.temperature_k, src.crystal);
  const double physical = kSpeedOfLight / (2.0 * spacing_hz) - (ng - 1.0) * crystal_length_at(src);
  return physical / (1.0 + src.spacer_expansion_per_k * (src.temperature_k - kExpansionReferenceK));
}

Result cmd_design(const RunConfig& cfg, const Options& opt) {
  ItuGrid grid = cfg.grid;
  if (opt.target_ghz) {
    if (!(*opt.target_ghz > 0.0)) throw ConfigError(0, "--target-ghz must be positive");
    grid.spacing_hz = *opt.target_ghz * 1e9;
  }
  grid.validate();
  const double center_nm = degenerate_m(cfg) * 1e9;
  const auto [lo_hz, hi_hz] = band_hz(opt, center_nm - 10.0, center_nm + 10.0);
  const auto& src = cfg.source;

  DesignBounds bounds;
  if (opt.length_mm.empty()) {
    bounds.length_lo_m = std::max(1.05 * src.crystal.length_m, 0.5 * src.physical_length_m);
    bounds.length_hi_m = 2.5 * src.physical_length_m;
  } else {
    const auto [a, b] = parse_range(opt.length_mm, "--length-mm");
    bounds.length_lo_m = a * 1e-3;
    bounds.length_hi_m = b * 1e-3;
  }
  const auto& window = src.crystal.window;
  if (opt.t_range_c.empty()) {
    bounds.temperature_lo_k = std::max(window.temperature_min_k, src.temperature_k - 2.0);
    bounds.temperature_hi_k = std::min(window.temperature_max_k, src.temperature_k + 2.0);
  } else {
    const auto [a, b] = parse_range(opt.t_range_c, "--t-range-c");
    bounds.temperature_lo_k = celsius_to_kelvin(a);
    bounds.temperature_hi_k = celsius_to_kelvin(b);
  }
  const auto res = match_design(src, grid, bounds, lo_hz, hi_hz);

  SourceSpec solved = src;
  solved.physical_length_m = res.physical_length_m;
  solved.temperature_k = res.temperature_k;
  const double lambda_mid = frequency_to_wavelength(0.5 * (lo_hz + hi_hz));
  double max_abs = 0.0;
  double sum_sq = 0.0;
  Table table{{"mode_index", "frequency_hz", "channel", "detuning_mhz", "detuning_linewidths"}, {}};
  for (const auto& row : res.detunings) {
    max_abs = std::max(max_abs, std::abs(row.detuning_hz));
    sum_sq += row.detuning_hz * row.detuning_hz;
    table.rows.push_back({static_cast<double>(row.mode_index), row.frequency_hz, static_cast<double>(row.channel),
                          row.detuning_hz * 1e-6, row.detuning_linewidths});
  }
  Result r;
  r.report["target_spacing_ghz"] = grid.spacing_hz * 1e-9;
  r.report["physical_length_mm"] = res.physical_length_m * 1e3;
  r.report["temperature_c"] = kelvin_to_celsius(res.temperature_k);
  r.report["closed_form_length_mm"] = closed_form_length(solved, grid.spacing_hz, lambda_mid) * 1e3;
  r.report["fsr_ghz"] = res.fsr_hz * 1e-9;
  r.report["fsr_mismatch_mhz"] = res.fsr_mismatch_hz * 1e-6;
  r.report["fsr_mismatch_relative"] = res.fsr_mismatch_hz / grid.spacing_hz;
  r.report["objective"] = res.objective;
  r.report["best_scan_objective"] = res.best_scan_objective;
  r.report["dfsr_dlength_ghz_per_mm"] = res.dfsr_dlength_hz_per_m * 1e-12;
  r.report["dfsr_dtemperature_mhz_per_k"] = res.dfsr_dtemperature_hz_per_k * 1e-6;
  r.report["max_abs_detuning_mhz"] = max_abs * 1e-6;
  r.report["rms_detuning_mhz"] =
      res.detunings.empty() ? 0.0 : std::sqrt(sum_sq / static_cast<double>(res.detunings.size())) * 1e-6;
  r.report["evaluations"] = res.evaluations;
  r.table = std::move(table);
  r.table_key = "detunings";
  return r;
}

Result cmd_report(const RunConfig& cfg, const Options&) {
  const double df = cfg.simulation.photon_bandwidth_hz;
  const auto rep = rate_report(Brightness{cfg.rates.brightness}, cfg.source.pump_power_w, df, cfg.rates.enhancement_factor);
  const double cavity_df = linewidth(cfg.source, degenerate_m(cfg));
  const double cavity_rate = pair_rate(Brightness{cfg.rates.brightness}, cfg.source.pump_power_w, cavity_df);
  std::vector<std::pair<std::string, double>> values{
      {"brightness_per_s_mw_mhz", rep.brightness},
      {"pump_power_mw", cfg.source.pump_power_w * 1e3},
      {"bandwidth_mhz", df * 1e-6},
      {"pair_rate_hz", rep.pair_rate_hz},
      {"coherence_ns", rep.coherence_time_s * 1e9},
      {"pairs_per_mode", rep.pairs_per_mode},
      {"enhancement_factor_reported", rep.enhancement_factor_reported},
      {"cavity_linewidth_mhz", cavity_df * 1e-6},
      {"cavity_pair_rate_hz", cavity_rate},
      {"cavity_pairs_per_mode", pairs_per_mode(cavity_rate, coherence_time(cavity_df))},
  };
  Result r;
  std::ostringstream csv;
  csv << "quantity,value\n";
  for (const auto& [key, value] : values) {
    r.report[key] = value;
    csv << key << ',' << num(value) << '\n';
  }
  r.csv_raw = csv.str();
  return r;
}

void emit(const Result& result, const json& prov, const std::string& format, std::ostream& os) {
  if (format == "json") {
    json doc = json::object();
    doc["provenance"] = prov;
    for (const auto& [key, value] : result.report.items()) doc[key] = value;
    if (result.table) doc[result.table_key] = result.table->to_json();
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# tool_version: " << prov["tool_version"].get<std::string>() << '\n';
  os << "# command: " << prov["command"].get<std::string>() << '\n';
  os << "# invocation: " << prov["invocation"].get<std::string>() << '\n';
  os << "# config_sha256: " << prov["config_sha256"].get<std::string>() << '\n';
  os << "# seed: " << (prov["seed"].is_null() ? std::string("none") : std::to_string(prov["seed"].get<std::uint64_t>()))
     << '\n';
  os << "# poling_period_um: " << num(prov["poling_period_um"].get<double>()) << '\n';
  os << "# dispersion: " << prov["dispersion"].get<std::string>() << '\n';
  for (const auto& line : prov["defaults"]) os << "# default: " << line.get<std::string>() << '\n';
  for (const auto& [key, value] : result.csv_extra) os << "# " << key << ": " << value << '\n';
  if (!result.csv_raw.empty()) {
    os << result.csv_raw;
    return;
  }
  if (!result.table) return;
  const auto& t = *result.table;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
    os << '\n';
  }
}

} // namespace

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for a cavity-enhanced down-conversion photon-pair source", "opo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options opt;
  std::uint64_t seed = 0;

  using Handler = Result (*)(const RunConfig&, const Options&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"index", "refractive and group index table", cmd_index},
      {"cavity", "FSR, finesse, linewidth, waist and escape probability", cmd_cavity},
      {"scan", "cavity transmission versus frequency", cmd_scan},
      {"spectrum", "cluster spectrum of the doubly resonant source", cmd_spectrum},
      {"tuning", "cluster envelope position versus temperature", cmd_tuning},
      {"coincidence", "simulated coincidence histogram and bandwidth fit", cmd_coincidence},
      {"g2", "simulated heralded autocorrelation of thermal light", cmd_g2},
      {"design", "match the mode comb to an ITU grid", cmd_design},
      {"report", "pair rate and pairs per mode", cmd_report},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "configuration file");
    sub->add_option("--seed", seed, "random seed (stochastic commands)");
    sub->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", opt.out, "output path, '-' for stdout");
    if (name == "index" || name == "scan" || name == "spectrum" || name == "design") {
      sub->add_option("--band-nm", opt.band_nm, "wavelength band A:B in nm");
    }
    if (name == "tuning" || name == "design") sub->add_option("--t-range-c", opt.t_range_c, "temperature range A:B in C");
    if (name == "index" || name == "scan" || name == "tuning") {
      sub->add_option("--step", opt.step, "grid step (index: nm, scan: MHz, tuning: K)");
    }
    if (name == "coincidence" || name == "g2") sub->add_option("--duration-s", opt.duration_s, "simulated duration");
    if (name == "design") {
      sub->add_option("--target-ghz", opt.target_ghz, "target channel spacing");
      sub->add_option("--length-mm", opt.length_mm, "mirror separation search range A:B in mm");
    }
    if (name == "spectrum") sub->add_flag("--per-mode", opt.per_mode, "CSV: one row per comb mode, no convolution");
    handlers.emplace(sub, handler);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::validation_error;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) opt.seed = seed;
  try {
    const RunConfig cfg = load_config(opt.config_path);
    const std::string format = opt.format.empty() ? cfg.output.format : opt.format;
    const std::string path = opt.out.empty() ? cfg.output.path : opt.out;
    const Result result = handlers.at(chosen)(cfg, opt);
    const json prov = provenance(cfg, opt, chosen->get_name(), args);
    if (path == "-") {
      emit(result, prov, format, out);
    } else {
      std::ofstream file(path, std::ios::binary);
      if (!file) throw Error("cannot open output file '" + path + "'");
      emit(result, prov, format, file);
      if (!file) throw Error("failed writing '" + path + "'");
    }
    return ExitCode::ok;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::validation_error;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::validation_error;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return ExitCode::runtime_error;
  }
}

} // namespace opo::cli
