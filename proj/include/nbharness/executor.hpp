#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nbharness {

// Client side of the execution shim's line protocol: one JSON request line on
// the shim's stdin, one JSON response line on its stdout, exit 0 iff ok.

enum class CellStatus { ok, exception, timeout };

std::string_view cell_status_name(CellStatus status) noexcept;

struct ExecCell {
    std::string id;
    std::string source;
};

struct ExecRequest {
    std::filesystem::path workdir;
    std::vector<ExecCell> cells;
    double timeout_per_cell_s = 60.0;
    std::optional<std::string> stop_after_id;
};

struct CellResult {
    std::string id;
    CellStatus status = CellStatus::ok;
    std::optional<std::string> error_type;
    std::optional<std::string> error_message;
    double duration_s = 0.0;
};

struct ExecResponse {
    std::vector<CellResult> results;
    bool ok = false;
};

nlohmann::json request_to_json(const ExecRequest& req);

/// Parses and validates one response line against the request it answers:
/// results must be an in-order prefix of the request's cells with only the
/// last entry allowed to be non-ok. Throws Error{ExecutorCrash} otherwise.
ExecResponse parse_exec_response(std::string_view line, const ExecRequest& req);

class Executor {
public:
    virtual ~Executor() = default;
    virtual ExecResponse run(const ExecRequest& req) = 0;
};

// Splits a shim command line on whitespace; single and double quotes group.
std::vector<std::string> split_command(std::string_view command);

class ShimExecutor final : public Executor {
public:
    explicit ShimExecutor(std::vector<std::string> command);

    // Resolution order: explicit override, $NBHARNESS_SHIM, `nbshim` on PATH.
    static std::optional<ShimExecutor> discover(std::string_view override_command = {});

    /// Spawns one shim process per request. The shim enforces per-cell
    /// timeouts itself; this side only applies a coarse guard deadline and
    /// throws Error{ExecutorCrash} if the shim dies or answers garbage.
    ExecResponse run(const ExecRequest& req) override;

    const std::vector<std::string>& command() const noexcept { return command_; }

    // Extra seconds beyond the summed per-cell budget before the shim is killed.
    double guard_margin_s = 10.0;

private:
    std::vector<std::string> command_;
};

}  // namespace nbharness
