#include "nbharness/manifest.hpp"

#include <chrono>
#include <ctime>

#include "nbharness/digest.hpp"
#include "nbharness/io.hpp"

namespace fs = std::filesystem;

namespace nbharness {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void add_input(RunManifest& m, const fs::path& input) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
        m.input_digests[input.generic_string()] = "directory";
    } else if (fs::is_regular_file(input, ec)) {
        m.input_digests[input.generic_string()] = sha256_file_hex(input);
    }
}

json manifest_to_json(const RunManifest& m) {
    return {{"tool_version", m.tool_version}, {"command_line", m.command_line}, {"config", m.config},
            {"input_digests", m.input_digests}, {"output_digest", m.output_digest}, {"started_at", m.started_at},
            {"finished_at", m.finished_at}};
}

fs::path manifest_path_for(const fs::path& output) {
    auto p = output;
    p += ".manifest.json";
    return p;
}

void write_manifest(RunManifest m, const fs::path& output) {
    m.output_digest = sha256_file_hex(output);
    m.finished_at = utc_timestamp();
    write_file(manifest_path_for(output), manifest_to_json(m).dump(2) + "\n");
}

}  // namespace nbharness
