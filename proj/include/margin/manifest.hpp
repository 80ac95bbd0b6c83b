#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

namespace margin {

/// Everything needed to reproduce one CLI run. Written next to the outputs
/// of every run and accepted back through --manifest.
struct RunManifest {
  static constexpr int kFormatVersion = 1;

  std::string task;
  nlohmann::json inputs = nlohmann::json::object();   // input name -> path
  nlohmann::json params = nlohmann::json::object();   // resolved algorithm parameters
  std::optional<std::uint64_t> seed;
  std::string output;                                 // primary output path
  int format_version = kFormatVersion;
  nlohmann::json schemas = nlohmann::json::object();  // output file -> column names

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);

  static RunManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const RunManifest&) const = default;
};

}  // namespace margin
