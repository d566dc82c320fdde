#include "manifest.hpp"

#include <fstream>

#include "lpl/errors.hpp"
#include "lpl/version.hpp"

namespace lpl::cli {

nlohmann::json manifest_json(const RunManifest& manifest, bool include_volatile) {
  nlohmann::json j{{"command", manifest.command},
                   {"version", std::string(kVersion)},
                   {"seed", manifest.seed},
                   {"threads", manifest.threads},
                   {"config_hash", manifest.config_hash},
                   {"inputs", manifest.inputs},
                   {"outputs", manifest.outputs}};
  if (include_volatile) j["duration_seconds"] = manifest.duration_seconds;
  return j;
}

void write_manifest_file(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << manifest_json(manifest, /*include_volatile=*/true).dump() << '\n';
}

PartialMarker::PartialMarker(std::filesystem::path marker_path) : path_(std::move(marker_path)) {
  std::ofstream marker(path_, std::ios::binary);
  if (!marker) throw IoError("cannot create partial marker: " + path_.string());
}

void PartialMarker::commit() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace lpl::cli
