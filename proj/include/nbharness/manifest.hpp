#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace nbharness {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record written next to every output file as <output>.manifest.json.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::vector<std::string> command_line;
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, std::string> input_digests;  // path -> sha256 (directories map to "directory")
    std::string output_digest;
    std::string started_at;
    std::string finished_at;
};

std::string utc_timestamp();

void add_input(RunManifest& m, const std::filesystem::path& input);

nlohmann::json manifest_to_json(const RunManifest& m);

std::filesystem::path manifest_path_for(const std::filesystem::path& output);

// Fills output_digest and finished_at from the written output, then writes the manifest.
void write_manifest(RunManifest m, const std::filesystem::path& output);

}  // namespace nbharness
