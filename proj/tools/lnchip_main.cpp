// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: simulate the chip's voltage fringes and delay-line
// interference, print wafer channel tables and analytic morphing curves, or
// replay a recorded run manifest.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lnchip/commands.hpp"
#include "lnchip/version.hpp"

namespace {

void add_detection_flags(CLI::App* app, lnchip::cmd::DetectionOptions& det) {
  app->add_option("--pair-rate", det.pair_rate_hz, "Generated pair rate in the waveguides (Hz)")
      ->capture_default_str();
  app->add_option("--efficiency-r1", det.efficiency_r1, "Detector efficiency on port R1")
      ->capture_default_str();
  app->add_option("--efficiency-r4", det.efficiency_r4, "Detector efficiency on port R4")
      ->capture_default_str();
  app->add_option("--dark-rate", det.dark_rate_hz, "Dark count rate per detector (Hz)")
      ->capture_default_str();
  app->add_option("--window", det.coincidence_window_ns, "Coincidence window (ns)")
      ->capture_default_str();
  app->add_option("--duration", det.duration_s, "Integration time per sweep point (s)")
      ->capture_default_str();
  app->add_flag("--noiseless", det.noiseless,
                "Write expectation values instead of Poisson-sampled counts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of a reconfigurable PPLN waveguide photon-pair chip"};
  app.set_version_flag("--version", std::string(lnchip::kToolVersion));
  app.require_subcommand(1);

  lnchip::cmd::FringeScanArgs fringe;
  CLI::App* fringe_cmd =
      app.add_subcommand("fringe-scan", "Sweep the bias voltage and fit the coincidence fringes");
  fringe_cmd->add_option("--config", fringe.config_path, "Chip config JSON")->required();
  fringe_cmd->add_option("--umin", fringe.grid.min, "Sweep start (V)")->capture_default_str();
  fringe_cmd->add_option("--umax", fringe.grid.max, "Sweep end (V)")->capture_default_str();
  fringe_cmd->add_option("--steps", fringe.grid.steps, "Sweep points")->capture_default_str();
  fringe_cmd->add_option("--phase-noise", fringe.phase_noise_sigma_rad,
                         "Gaussian phase jitter sigma (rad)")
      ->capture_default_str();
  fringe_cmd->add_option("--seed", fringe.seed, "Master seed")->capture_default_str();
  fringe_cmd->add_option("--out", fringe.out_dir, "Output directory")->required();
  fringe_cmd->add_option("--format", fringe.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  add_detection_flags(fringe_cmd, fringe.detection);

  lnchip::cmd::HomScanArgs hom;
  CLI::App* hom_cmd = app.add_subcommand(
      "hom-scan", "Interfere R1/R4 on an external 50:50 splitter against a delay line");
  hom_cmd->add_option("--config", hom.config_path, "Chip config JSON")->required();
  hom_cmd->add_option("--voltage", hom.u_operating_volts, "Operating bias (V)")
      ->capture_default_str();
  hom_cmd->add_option("--dmin", hom.delay_grid.min, "Delay sweep start (ps)")->capture_default_str();
  hom_cmd->add_option("--dmax", hom.delay_grid.max, "Delay sweep end (ps)")->capture_default_str();
  hom_cmd->add_option("--steps", hom.delay_grid.steps, "Sweep points")->capture_default_str();
  hom_cmd->add_option("--filter-center", hom.filter_center_nm, "Bandpass center (nm)")
      ->capture_default_str();
  hom_cmd->add_option("--filter-bandwidth", hom.filter_bandwidth_nm, "Bandpass FWHM (nm)")
      ->capture_default_str();
  hom_cmd->add_option("--mode-overlap", hom.mode_overlap,
                      "Residual non-delay mode overlap in [0,1]")
      ->capture_default_str();
  hom_cmd->add_option("--seed", hom.seed, "Master seed")->capture_default_str();
  hom_cmd->add_option("--out", hom.out_dir, "Output directory")->required();
  hom_cmd->add_option("--format", hom.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  add_detection_flags(hom_cmd, hom.detection);

  lnchip::cmd::ChannelsArgs channels;
  double channels_temperature = -1e9;
  CLI::App* channels_cmd =
      app.add_subcommand("channels", "Phase-matched wavelength per wafer channel");
  channels_cmd->add_option("--config", channels.config_path,
                           "Chip config JSON (supplies temperature and crystal length)");
  channels_cmd->add_option("--periods", channels.periods_um,
                           "Poling periods in um (default: the 9-channel wafer layout)");
  channels_cmd->add_option("--temperature", channels_temperature, "Working temperature (C)");
  channels_cmd->add_option("--out", channels.out_dir, "Output directory")->required();
  channels_cmd->add_option("--format", channels.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  lnchip::cmd::MorphArgs morph;
  CLI::App* morph_cmd =
      app.add_subcommand("morph", "Analytic separated/bunched probabilities versus bias");
  morph_cmd->add_option("--config", morph.config_path, "Chip config JSON")->required();
  morph_cmd->add_option("--umin", morph.grid.min, "Sweep start (V)")->capture_default_str();
  morph_cmd->add_option("--umax", morph.grid.max, "Sweep end (V)")->capture_default_str();
  morph_cmd->add_option("--steps", morph.grid.steps, "Sweep points")->capture_default_str();
  morph_cmd->add_option("--out", morph.out_dir, "Output directory")->required();
  morph_cmd->add_option("--format", morph.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  std::string replay_manifest;
  std::string replay_out;
  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a recorded manifest");
  replay_cmd->add_option("--manifest", replay_manifest, "Path to manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    lnchip::cmd::CommandResult result;
    if (fringe_cmd->parsed()) {
      result = lnchip::cmd::cmd_fringe_scan(fringe);
    } else if (hom_cmd->parsed()) {
      result = lnchip::cmd::cmd_hom_scan(hom);
    } else if (channels_cmd->parsed()) {
      if (channels_temperature > -1e8) channels.temperature_c = channels_temperature;
      result = lnchip::cmd::cmd_channels(channels);
    } else if (morph_cmd->parsed()) {
      result = lnchip::cmd::cmd_morph(morph);
    } else if (replay_cmd->parsed()) {
      result = lnchip::cmd::replay(replay_manifest, replay_out);
    }
    std::cout << result.summary.dump(2) << "\n";
    return result.exit_code;
  } catch (const lnchip::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return lnchip::cmd::kExitConfigError;
  } catch (const lnchip::fit_error& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return lnchip::cmd::kExitFitFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return lnchip::cmd::kExitDomainError;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return lnchip::cmd::kExitDomainError;
  } catch (const std::out_of_range& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return lnchip::cmd::kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
