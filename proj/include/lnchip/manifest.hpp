// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run manifests: every command writes one next to its outputs. A manifest
// pins the command, the config file content hash, the master seed and the
// sweep grid, and re-running from it reproduces the outputs byte for byte.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnchip/detail/io.hpp"
#include "lnchip/detail/sha256.hpp"
#include "lnchip/errors.hpp"
#include "lnchip/version.hpp"

namespace lnchip::cmd {

struct RunManifest {
  int schema_version = kOutputSchemaVersion;
  std::string tool_version = std::string(kToolVersion);
  std::string command;
  std::string config_path;    // empty when the command ran without a config file
  std::string config_sha256;  // empty when config_path is empty
  std::uint64_t seed = 0;
  nlohmann::json grid;        // command-specific sweep description
  nlohmann::json options;     // full argument set, sufficient for replay
  std::vector<std::string> outputs;
};

inline nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"schema_version", m.schema_version},
                        {"tool_version", m.tool_version},
                        {"command", m.command},
                        {"config_path", m.config_path},
                        {"config_sha256", m.config_sha256},
                        {"seed", m.seed},
                        {"grid", m.grid},
                        {"options", m.options},
                        {"outputs", m.outputs}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config_path = j.at("config_path").get<std::string>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.grid = j.at("grid");
    m.options = j.at("options");
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("manifest: ") + e.what());
  }
  if (m.schema_version != kOutputSchemaVersion) {
    throw config_error("manifest: unsupported schema version " +
                       std::to_string(m.schema_version));
  }
  return m;
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  detail::write_text_file(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("manifest parse error: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace lnchip::cmd
