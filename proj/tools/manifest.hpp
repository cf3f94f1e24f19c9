#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace notip::cli {

// Everything needed to rerun a command: the argument vector (with the seed made explicit),
// the resolved configuration and the files it touched.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version;
  double wall_clock_seconds = 0.0;
  std::string started_at;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void save_manifest(const std::string& path, const RunManifest& m);
RunManifest load_manifest(const std::string& path);

std::string utc_timestamp(std::chrono::system_clock::time_point t);

}  // namespace notip::cli
