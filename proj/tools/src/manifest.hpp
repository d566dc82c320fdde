#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace lpl::cli {

/// Provenance record written next to every command's outputs. The volatile
/// duration field lives only in the standalone manifest file so that data
/// outputs stay byte-identical across reruns.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config_hash;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;
};

nlohmann::json manifest_json(const RunManifest& manifest, bool include_volatile);
void write_manifest_file(const std::filesystem::path& path, const RunManifest& manifest);

/// Marks an output location as incomplete until commit() removes the marker.
/// A command aborting mid-write leaves the marker behind.
class PartialMarker {
 public:
  explicit PartialMarker(std::filesystem::path marker_path);
  void commit();

 private:
  std::filesystem::path path_;
};

/// Wall-clock stopwatch for the manifest.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace lpl::cli
