#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace nbharness {

struct ProcessResult {
    int exit_code = -1;    // valid when term_signal == 0
    int term_signal = 0;
    bool timed_out = false;
    std::string out;
    std::string err;
};

// Spawns argv[0] (PATH lookup) in its own process group, feeds `input` on
// stdin, and collects stdout/stderr. On deadline expiry the whole group is
// killed with SIGKILL.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::chrono::milliseconds timeout);

// Finds an executable on PATH; empty when absent.
std::string find_on_path(std::string_view name);

}  // namespace nbharness
