// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end commands over a chip config file: voltage fringe scans with
// per-channel fits, the external-splitter delay scan, the wafer channel
// table and the analytic morphing curve. Every command writes plot-ready
// CSV (optionally a JSON mirror), a fit report where it fits, and a run
// manifest; identical manifests reproduce identical bytes.
//
// Exit codes: 0 success, 2 config error, 3 fit failure, 4 numeric/domain
// error.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnchip/analysis.hpp"
#include "lnchip/chip_model.hpp"
#include "lnchip/detail/io.hpp"
#include "lnchip/detail/rng.hpp"
#include "lnchip/detection.hpp"
#include "lnchip/errors.hpp"
#include "lnchip/manifest.hpp"
#include "lnchip/phase_match.hpp"

namespace lnchip::cmd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitFitFailure = 3;
inline constexpr int kExitDomainError = 4;

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int steps = 2;

  std::vector<double> values() const {
    if (steps < 2) throw std::invalid_argument("grid: need at least 2 steps");
    if (!(max > min)) throw std::invalid_argument("grid: max must exceed min");
    std::vector<double> v;
    v.reserve(steps);
    for (int i = 0; i < steps; ++i) {
      v.push_back(min + (max - min) * i / double(steps - 1));
    }
    return v;
  }

  nlohmann::json to_json() const { return {{"min", min}, {"max", max}, {"steps", steps}}; }
  static GridSpec from_json(const nlohmann::json& j) {
    return GridSpec{j.at("min").get<double>(), j.at("max").get<double>(), j.at("steps").get<int>()};
  }
};

struct DetectionOptions {
  double pair_rate_hz = 6.2e6;
  double efficiency_r1 = 0.1;
  double efficiency_r4 = 0.1;
  double dark_rate_hz = 100.0;
  double coincidence_window_ns = 1.0;
  double duration_s = 1.0;
  bool noiseless = false;

  detect::DetectorModel detector() const {
    return detect::DetectorModel{efficiency_r1, efficiency_r4, dark_rate_hz,
                                 coincidence_window_ns};
  }

  nlohmann::json to_json() const {
    return {{"pair_rate_hz", pair_rate_hz},
            {"efficiency_r1", efficiency_r1},
            {"efficiency_r4", efficiency_r4},
            {"dark_rate_hz", dark_rate_hz},
            {"coincidence_window_ns", coincidence_window_ns},
            {"duration_s", duration_s},
            {"noiseless", noiseless}};
  }
  static DetectionOptions from_json(const nlohmann::json& j) {
    DetectionOptions d;
    d.pair_rate_hz = j.at("pair_rate_hz").get<double>();
    d.efficiency_r1 = j.at("efficiency_r1").get<double>();
    d.efficiency_r4 = j.at("efficiency_r4").get<double>();
    d.dark_rate_hz = j.at("dark_rate_hz").get<double>();
    d.coincidence_window_ns = j.at("coincidence_window_ns").get<double>();
    d.duration_s = j.at("duration_s").get<double>();
    d.noiseless = j.at("noiseless").get<bool>();
    return d;
  }
};

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
};

namespace detail_cmd {

using lnchip::detail::format_double;

struct ScanRow {
  double x;
  double coinc_r1r4, coinc_r1r1, coinc_r4r4;
  double singles_r1, singles_r4;
  double acc_r1r4, acc_r1r1, acc_r4r4;
};

inline constexpr const char* kScanCsvHeader =
    "x_value,coinc_r1r4,coinc_r1r1,coinc_r4r4,singles_r1,singles_r4,accidentals";

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = kScanCsvHeader;
  out.push_back('\n');
  for (const auto& r : rows) {
    out += format_double(r.x) + ',' + format_double(r.coinc_r1r4) + ',' +
           format_double(r.coinc_r1r1) + ',' + format_double(r.coinc_r4r4) + ',' +
           format_double(r.singles_r1) + ',' + format_double(r.singles_r4) + ',' +
           format_double(r.acc_r1r4) + '\n';
  }
  return out;
}

inline nlohmann::json scan_json(const std::vector<ScanRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"x_value", r.x},
                   {"coinc_r1r4", r.coinc_r1r4},
                   {"coinc_r1r1", r.coinc_r1r1},
                   {"coinc_r4r4", r.coinc_r4r4},
                   {"singles_r1", r.singles_r1},
                   {"singles_r4", r.singles_r4},
                   {"accidentals", r.acc_r1r4}});
  }
  return nlohmann::json{{"schema_version", kOutputSchemaVersion}, {"rows", std::move(arr)}};
}

inline ScanRow sample_row(double x, const detect::PairRates& rates, const DetectionOptions& det,
                          std::uint64_t point_seed) {
  if (det.noiseless) {
    const detect::ExpectedCounts e = detect::expected_counts(rates, det.duration_s);
    return ScanRow{x,           e.coinc_r1r4, e.coinc_r1r1, e.coinc_r4r4, e.singles_r1,
                   e.singles_r4, e.acc_r1r4,   e.acc_r1r1,   e.acc_r4r4};
  }
  const detect::CountRecord rec =
      detect::simulate_counts(rates, det.duration_s, point_seed, det.coincidence_window_ns);
  return ScanRow{x,
                 static_cast<double>(rec.coinc_r1r4),
                 static_cast<double>(rec.coinc_r1r1),
                 static_cast<double>(rec.coinc_r4r4),
                 static_cast<double>(rec.singles_r1),
                 static_cast<double>(rec.singles_r4),
                 rec.estimated_acc_r1r4,
                 rec.estimated_acc_r1r1,
                 rec.estimated_acc_r4r4};
}

/// Accidental-corrected fit input for one coincidence channel.
inline std::vector<fit::WeightedPoint> channel_points(const std::vector<ScanRow>& rows,
                                                      double ScanRow::* raw,
                                                      double ScanRow::* acc) {
  std::vector<fit::WeightedPoint> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) {
    const fit::CorrectedCount c = fit::subtract_accidentals(r.*raw, r.*acc);
    pts.push_back(fit::WeightedPoint{r.x, c.value, std::max(c.sigma, 1.0)});
  }
  return pts;
}

inline std::pair<chip::ChipConfig, std::string> load_chip_config(const std::string& path) {
  std::string content;
  try {
    content = lnchip::detail::read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw config_error(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config parse error: " + std::string(e.what()));
  }
  return {chip::chip_config_from_json(j), lnchip::detail::sha256_hex(content)};
}

inline void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw config_error("output directory not set");
  std::filesystem::create_directories(out_dir);
}

}  // namespace detail_cmd

// ---------------------------------------------------------------------------
// fringe-scan

struct FringeScanArgs {
  std::string config_path;
  GridSpec grid{-10.0, 20.0, 61};
  DetectionOptions detection;
  double phase_noise_sigma_rad = 0.0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";

  nlohmann::json to_json() const {
    return {{"config_path", config_path},
            {"grid", grid.to_json()},
            {"detection", detection.to_json()},
            {"phase_noise_sigma_rad", phase_noise_sigma_rad},
            {"seed", seed},
            {"format", format}};
  }
  static FringeScanArgs from_json(const nlohmann::json& j) {
    FringeScanArgs a;
    a.config_path = j.at("config_path").get<std::string>();
    a.grid = GridSpec::from_json(j.at("grid"));
    a.detection = DetectionOptions::from_json(j.at("detection"));
    a.phase_noise_sigma_rad = j.at("phase_noise_sigma_rad").get<double>();
    a.seed = j.at("seed").get<std::uint64_t>();
    a.format = j.at("format").get<std::string>();
    return a;
  }
};

/// Voltage sweep of all three coincidence channels, accidental subtraction,
/// one fringe fit per channel. Per-channel fit failures are reported and the
/// run continues; the exit code is 3 if any channel failed.
inline CommandResult cmd_fringe_scan(const FringeScanArgs& args) {
  auto [config, config_hash] = detail_cmd::load_chip_config(args.config_path);
  detail_cmd::ensure_out_dir(args.out_dir);
  const std::filesystem::path out_dir(args.out_dir);
  const std::vector<double> grid = args.grid.values();
  if (static_cast<int>(grid.size()) < 6) throw config_error("fringe-scan: need at least 6 steps");

  std::vector<detail_cmd::ScanRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const chip::PatternProbabilities p =
        chip::pattern_probabilities_with_phase_noise(config, grid[i], args.phase_noise_sigma_rad);
    // Unconditional probabilities already carry the success factor.
    const detect::PairRates rates = detect::coincidence_rates(
        detect::PatternWeights{p.p_separated, p.p_bunched_r1, p.p_bunched_r4, 1.0},
        args.detection.pair_rate_hz, args.detection.detector());
    rows.push_back(detail_cmd::sample_row(grid[i], rates, args.detection,
                                          lnchip::detail::derive_seed(args.seed, i)));
  }

  std::vector<std::string> outputs = {"fringe_scan.csv", "fringe_fit.json"};
  lnchip::detail::write_text_file(out_dir / "fringe_scan.csv", detail_cmd::scan_csv(rows));
  if (args.format == "json") {
    lnchip::detail::write_text_file(out_dir / "fringe_scan.json",
                                    detail_cmd::scan_json(rows).dump(2) + "\n");
    outputs.insert(outputs.begin() + 1, "fringe_scan.json");
  }

  nlohmann::json fits;
  nlohmann::json summary_vis;
  bool any_fit_failed = false;
  const std::pair<const char*, std::pair<double detail_cmd::ScanRow::*, double detail_cmd::ScanRow::*>>
      channels[] = {
          {"r1r4", {&detail_cmd::ScanRow::coinc_r1r4, &detail_cmd::ScanRow::acc_r1r4}},
          {"r1r1", {&detail_cmd::ScanRow::coinc_r1r1, &detail_cmd::ScanRow::acc_r1r1}},
          {"r4r4", {&detail_cmd::ScanRow::coinc_r4r4, &detail_cmd::ScanRow::acc_r4r4}}};
  for (const auto& [name, members] : channels) {
    try {
      const fit::FringeFit f =
          fit::fit_fringe(detail_cmd::channel_points(rows, members.first, members.second));
      fits[name] = fit::fit_report(f);
      summary_vis[name] = f.visibility;
    } catch (const fit_error& e) {
      fits[name] = {{"error", e.what()}};
      summary_vis[name] = nullptr;
      any_fit_failed = true;
    }
  }
  lnchip::detail::write_text_file(out_dir / "fringe_fit.json", fits.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "fringe-scan";
  manifest.config_path = args.config_path;
  manifest.config_sha256 = config_hash;
  manifest.seed = args.seed;
  manifest.grid = args.grid.to_json();
  manifest.options = args.to_json();
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest);

  CommandResult result;
  result.exit_code = any_fit_failed ? kExitFitFailure : kExitOk;
  result.summary = {{"command", "fringe-scan"}, {"visibility", summary_vis}, {"fits", fits}};
  return result;
}

// ---------------------------------------------------------------------------
// hom-scan

struct HomScanArgs {
  std::string config_path;
  double u_operating_volts = 0.0;
  GridSpec delay_grid{-3.0, 3.0, 61};
  DetectionOptions detection;
  double filter_center_nm = 1560.0;
  double filter_bandwidth_nm = 14.0;
  double mode_overlap = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";

  nlohmann::json to_json() const {
    return {{"config_path", config_path},
            {"u_operating_volts", u_operating_volts},
            {"delay_grid", delay_grid.to_json()},
            {"detection", detection.to_json()},
            {"filter_center_nm", filter_center_nm},
            {"filter_bandwidth_nm", filter_bandwidth_nm},
            {"mode_overlap", mode_overlap},
            {"seed", seed},
            {"format", format}};
  }
  static HomScanArgs from_json(const nlohmann::json& j) {
    HomScanArgs a;
    a.config_path = j.at("config_path").get<std::string>();
    a.u_operating_volts = j.at("u_operating_volts").get<double>();
    a.delay_grid = GridSpec::from_json(j.at("delay_grid"));
    a.detection = DetectionOptions::from_json(j.at("detection"));
    a.filter_center_nm = j.at("filter_center_nm").get<double>();
    a.filter_bandwidth_nm = j.at("filter_bandwidth_nm").get<double>();
    a.mode_overlap = j.at("mode_overlap").get<double>();
    a.seed = j.at("seed").get<std::uint64_t>();
    a.format = j.at("format").get<std::string>();
    return a;
  }
};

/// Runs the chip at one bias, interferes R1/R4 on an external 50:50 splitter
/// across a delay grid, samples counts and fits the dip with the kernel
/// derived from the chip's own SPDC spectrum.
inline CommandResult cmd_hom_scan(const HomScanArgs& args) {
  auto [config, config_hash] = detail_cmd::load_chip_config(args.config_path);
  detail_cmd::ensure_out_dir(args.out_dir);
  const std::filesystem::path out_dir(args.out_dir);
  const std::vector<double> delays = args.delay_grid.values();
  if (delays.size() < 8) throw config_error("hom-scan: need at least 8 delay steps");

  const fock::StateVector state = chip::run_chip(config, args.u_operating_volts);
  const double success = state.success_probability();
  const qpm::SellmeierModel model = qpm::congruent_linbo3_ne();
  const qpm::QpmGrating grating{config.poling_period, config.crystal_length, config.temperature};
  const qpm::OpticalFilter filter{args.filter_center_nm, args.filter_bandwidth_nm};
  const qpm::SpdcSpectrum spectrum =
      qpm::spdc_spectrum(model, grating, config.electrode.pump_wavelength, filter);

  const std::vector<detect::HomPoint> curve =
      detect::hom_scan(state, spectrum, delays, args.mode_overlap);

  std::vector<detail_cmd::ScanRow> rows;
  rows.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double c = std::clamp(curve[i].coincidence_probability, 0.0, 1.0);
    // Output-side pattern weights behind the external splitter.
    const detect::PairRates rates = detect::coincidence_rates(
        detect::PatternWeights{c, (1.0 - c) / 2.0, (1.0 - c) / 2.0, success},
        args.detection.pair_rate_hz, args.detection.detector());
    rows.push_back(detail_cmd::sample_row(curve[i].delay_ps, rates, args.detection,
                                          lnchip::detail::derive_seed(args.seed, i)));
  }

  std::vector<std::string> outputs = {"hom_scan.csv", "hom_fit.json"};
  lnchip::detail::write_text_file(out_dir / "hom_scan.csv", detail_cmd::scan_csv(rows));
  if (args.format == "json") {
    lnchip::detail::write_text_file(out_dir / "hom_scan.json",
                                    detail_cmd::scan_json(rows).dump(2) + "\n");
    outputs.insert(outputs.begin() + 1, "hom_scan.json");
  }

  nlohmann::json fit_json;
  nlohmann::json summary;
  bool fit_failed = false;
  try {
    const fit::DipFit f = fit::fit_hom_dip(
        detail_cmd::channel_points(rows, &detail_cmd::ScanRow::coinc_r1r4,
                                   &detail_cmd::ScanRow::acc_r1r4),
        fit::spectrum_dip_kernel(spectrum));
    fit_json = fit::fit_report(f);
    summary = {{"visibility", f.visibility}, {"center_ps", f.center}, {"width_ps", f.width}};
  } catch (const fit_error& e) {
    fit_json = {{"error", e.what()}};
    summary = {{"error", e.what()}};
    fit_failed = true;
  }
  lnchip::detail::write_text_file(out_dir / "hom_fit.json", fit_json.dump(2) + "\n");

  RunManifest manifest;
  manifest.command = "hom-scan";
  manifest.config_path = args.config_path;
  manifest.config_sha256 = config_hash;
  manifest.seed = args.seed;
  manifest.grid = args.delay_grid.to_json();
  manifest.options = args.to_json();
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest);

  CommandResult result;
  result.exit_code = fit_failed ? kExitFitFailure : kExitOk;
  result.summary = {{"command", "hom-scan"}, {"dip", summary}};
  return result;
}

// ---------------------------------------------------------------------------
// channels

struct ChannelsArgs {
  std::string config_path;            // optional; supplies the temperature
  std::vector<double> periods_um;     // empty -> the 9-channel wafer layout
  std::optional<double> temperature_c;
  std::string out_dir;
  std::string format = "csv";

  nlohmann::json to_json() const {
    nlohmann::json j{{"config_path", config_path},
                     {"periods_um", periods_um},
                     {"format", format}};
    j["temperature_c"] = temperature_c ? nlohmann::json(*temperature_c) : nlohmann::json(nullptr);
    return j;
  }
  static ChannelsArgs from_json(const nlohmann::json& j) {
    ChannelsArgs a;
    a.config_path = j.at("config_path").get<std::string>();
    a.periods_um = j.at("periods_um").get<std::vector<double>>();
    if (!j.at("temperature_c").is_null()) a.temperature_c = j.at("temperature_c").get<double>();
    a.format = j.at("format").get<std::string>();
    return a;
  }
};

inline CommandResult cmd_channels(const ChannelsArgs& args) {
  detail_cmd::ensure_out_dir(args.out_dir);
  const std::filesystem::path out_dir(args.out_dir);

  std::string config_hash;
  double temperature = 25.5;
  double crystal_length = 10.0;
  if (!args.config_path.empty()) {
    auto [config, hash] = detail_cmd::load_chip_config(args.config_path);
    config_hash = hash;
    temperature = config.temperature;
    crystal_length = config.crystal_length;
  }
  if (args.temperature_c) temperature = *args.temperature_c;
  const std::vector<double> periods =
      args.periods_um.empty() ? qpm::default_poling_periods() : args.periods_um;

  const qpm::SellmeierModel model = qpm::congruent_linbo3_ne();
  const std::vector<qpm::ChannelRow> rows =
      qpm::channel_table(model, periods, temperature, crystal_length);

  std::string csv = "channel,period_um,shg_wavelength_nm\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows) {
    csv += std::to_string(r.channel) + ',' + detail_cmd::format_double(r.period_um) + ',' +
           detail_cmd::format_double(r.shg_wavelength_nm) + '\n';
    jrows.push_back({{"channel", r.channel},
                     {"period_um", r.period_um},
                     {"shg_wavelength_nm", r.shg_wavelength_nm}});
  }
  std::vector<std::string> outputs = {"channels.csv"};
  lnchip::detail::write_text_file(out_dir / "channels.csv", csv);
  if (args.format == "json") {
    lnchip::detail::write_text_file(
        out_dir / "channels.json",
        nlohmann::json{{"schema_version", kOutputSchemaVersion}, {"rows", jrows}}.dump(2) + "\n");
    outputs.push_back("channels.json");
  }

  RunManifest manifest;
  manifest.command = "channels";
  manifest.config_path = args.config_path;
  manifest.config_sha256 = config_hash;
  manifest.seed = 0;
  manifest.grid = {{"periods_um", periods}, {"temperature_c", temperature}};
  manifest.options = args.to_json();
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest);

  CommandResult result;
  result.summary = {{"command", "channels"}, {"rows", jrows}};
  return result;
}

// ---------------------------------------------------------------------------
// morph

struct MorphArgs {
  std::string config_path;
  GridSpec grid{-10.0, 20.0, 61};
  std::string out_dir;
  std::string format = "csv";

  nlohmann::json to_json() const {
    return {{"config_path", config_path}, {"grid", grid.to_json()}, {"format", format}};
  }
  static MorphArgs from_json(const nlohmann::json& j) {
    MorphArgs a;
    a.config_path = j.at("config_path").get<std::string>();
    a.grid = GridSpec::from_json(j.at("grid"));
    a.format = j.at("format").get<std::string>();
    return a;
  }
};

/// Analytic separated/bunched probabilities versus bias, no sampling noise.
inline CommandResult cmd_morph(const MorphArgs& args) {
  auto [config, config_hash] = detail_cmd::load_chip_config(args.config_path);
  detail_cmd::ensure_out_dir(args.out_dir);
  const std::filesystem::path out_dir(args.out_dir);

  const std::vector<chip::MorphPoint> curve = chip::morph_curve(config, args.grid.values());
  std::string csv = "U_volts,p_separated,p_bunched_r1,p_bunched_r4\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& p : curve) {
    csv += detail_cmd::format_double(p.u_volts) + ',' + detail_cmd::format_double(p.p_separated) +
           ',' + detail_cmd::format_double(p.p_bunched_r1) + ',' +
           detail_cmd::format_double(p.p_bunched_r4) + '\n';
    jrows.push_back({{"U_volts", p.u_volts},
                     {"p_separated", p.p_separated},
                     {"p_bunched_r1", p.p_bunched_r1},
                     {"p_bunched_r4", p.p_bunched_r4}});
  }
  std::vector<std::string> outputs = {"morph.csv"};
  lnchip::detail::write_text_file(out_dir / "morph.csv", csv);
  if (args.format == "json") {
    lnchip::detail::write_text_file(
        out_dir / "morph.json",
        nlohmann::json{{"schema_version", kOutputSchemaVersion}, {"rows", jrows}}.dump(2) + "\n");
    outputs.push_back("morph.json");
  }

  RunManifest manifest;
  manifest.command = "morph";
  manifest.config_path = args.config_path;
  manifest.config_sha256 = config_hash;
  manifest.seed = 0;
  manifest.grid = args.grid.to_json();
  manifest.options = args.to_json();
  manifest.outputs = outputs;
  write_manifest(out_dir, manifest);

  CommandResult result;
  result.summary = {{"command", "morph"}, {"points", curve.size()}};
  return result;
}

// ---------------------------------------------------------------------------
// replay

/// Re-runs the command recorded in a manifest. The config file is re-read
/// and its hash checked against the recorded one.
inline CommandResult replay(const std::string& manifest_path, const std::string& out_dir) {
  const RunManifest m = load_manifest(manifest_path);
  if (!m.config_path.empty()) {
    std::string content;
    try {
      content = lnchip::detail::read_text_file(m.config_path);
    } catch (const std::runtime_error& e) {
      throw config_error(e.what());
    }
    if (lnchip::detail::sha256_hex(content) != m.config_sha256) {
      throw config_error("replay: config file changed since the manifest was written");
    }
  }
  if (m.command == "fringe-scan") {
    FringeScanArgs a = FringeScanArgs::from_json(m.options);
    a.out_dir = out_dir;
    return cmd_fringe_scan(a);
  }
  if (m.command == "hom-scan") {
    HomScanArgs a = HomScanArgs::from_json(m.options);
    a.out_dir = out_dir;
    return cmd_hom_scan(a);
  }
  if (m.command == "channels") {
    ChannelsArgs a = ChannelsArgs::from_json(m.options);
    a.out_dir = out_dir;
    return cmd_channels(a);
  }
  if (m.command == "morph") {
    MorphArgs a = MorphArgs::from_json(m.options);
    a.out_dir = out_dir;
    return cmd_morph(a);
  }
  throw config_error("replay: unknown command '" + m.command + "'");
}

}  // namespace lnchip::cmd
