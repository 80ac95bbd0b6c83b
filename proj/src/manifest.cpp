#include "margin/manifest.hpp"

#include <fstream>

#include "margin/error.hpp"

namespace margin {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = format_version;
  doc["task"] = task;
  doc["inputs"] = inputs;
  doc["params"] = params;
  doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  doc["output"] = output;
  doc["schemas"] = schemas;
  return doc;
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("manifest must be a JSON object");
  RunManifest m;
  try {
    m.format_version = doc.value("format_version", kFormatVersion);
    if (m.format_version != kFormatVersion) {
      throw Error("unsupported manifest format version " + std::to_string(m.format_version));
    }
    m.task = doc.at("task").get<std::string>();
    if (doc.contains("inputs")) m.inputs = doc.at("inputs");
    if (doc.contains("params")) m.params = doc.at("params");
    if (doc.contains("seed") && !doc.at("seed").is_null()) m.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("output")) m.output = doc.at("output").get<std::string>();
    if (doc.contains("schemas")) m.schemas = doc.at("schemas");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  if (!m.inputs.is_object() || !m.params.is_object() || !m.schemas.is_object()) {
    throw Error("manifest inputs, params and schemas must be JSON objects");
  }
  return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("cannot parse manifest " + path.string() + ": " + e.what());
  }
}

void RunManifest::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace margin
