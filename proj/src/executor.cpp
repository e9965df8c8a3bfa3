#include "nbharness/executor.hpp"

#include <cstdlib>

#include "nbharness/error.hpp"
#include "nbharness/subprocess.hpp"

namespace nbharness {

using json = nlohmann::json;

std::string_view cell_status_name(CellStatus status) noexcept {
    switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::exception: return "exception";
    case CellStatus::timeout: return "timeout";
    }
    return "exception";
}

json request_to_json(const ExecRequest& req) {
    json cells = json::array();
    for (const auto& c : req.cells) {
        cells.push_back({{"id", c.id}, {"source", c.source}});
    }
    json j = {{"workdir", req.workdir.string()}, {"cells", std::move(cells)}, {"timeout_per_cell_s", req.timeout_per_cell_s}};
    if (req.stop_after_id) {
        j["stop_after_id"] = *req.stop_after_id;
    }
    return j;
}

namespace {

[[noreturn]] void crash(const std::string& why) { throw Error(ErrorCode::ExecutorCrash, why); }

std::optional<std::string> opt_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        crash(std::string("response field '") + key + "' is not a string");
    }
    return it->get<std::string>();
}

}  // namespace

ExecResponse parse_exec_response(std::string_view line, const ExecRequest& req) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::exception& e) {
        crash(std::string("unparseable shim response: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("ok") || !doc["ok"].is_boolean()) {
        crash("shim response lacks boolean 'ok'");
    }
    ExecResponse resp;
    resp.ok = doc["ok"].get<bool>();
    const auto& results = doc.value("results", json::array());
    if (!results.is_array()) {
        crash("shim response 'results' is not an array");
    }
    if (results.size() > req.cells.size()) {
        crash("shim returned more results than cells");
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!r.is_object()) {
            crash("shim result is not an object");
        }
        CellResult cr;
        cr.id = opt_string(r, "id").value_or("");
        if (cr.id != req.cells[i].id) {
            crash("shim result " + std::to_string(i) + " has id '" + cr.id + "', expected '" + req.cells[i].id + "'");
        }
        const auto status = opt_string(r, "status").value_or("");
        if (status == "ok") {
            cr.status = CellStatus::ok;
        } else if (status == "exception") {
            cr.status = CellStatus::exception;
        } else if (status == "timeout") {
            cr.status = CellStatus::timeout;
        } else {
            crash("unknown cell status '" + status + "'");
        }
        cr.error_type = opt_string(r, "error_type");
        cr.error_message = opt_string(r, "error_message");
        if (auto d = r.find("duration_s"); d != r.end() && d->is_number()) {
            cr.duration_s = std::max(0.0, d->get<double>());
        }
        if (!resp.results.empty() && resp.results.back().status != CellStatus::ok) {
            crash("shim kept executing after a failed cell");
        }
        resp.results.push_back(std::move(cr));
    }
    return resp;
}

std::vector<std::string> split_command(std::string_view command) {
    std::vector<std::string> parts;
    std::string cur;
    bool in_token = false;
    char quote = 0;
    for (char c : command) {
        if (quote != 0) {
            if (c == quote) {
                quote = 0;
            } else {
                cur.push_back(c);
            }
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
        } else if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) {
                parts.push_back(std::move(cur));
                cur.clear();
                in_token = false;
            }
        } else {
            cur.push_back(c);
            in_token = true;
        }
    }
    if (in_token) {
        parts.push_back(std::move(cur));
    }
    return parts;
}

ShimExecutor::ShimExecutor(std::vector<std::string> command) : command_(std::move(command)) {
    if (command_.empty()) {
        throw Error(ErrorCode::ExecutorUnavailable, "empty shim command");
    }
}

std::optional<ShimExecutor> ShimExecutor::discover(std::string_view override_command) {
    std::string cmd(override_command);
    if (cmd.empty()) {
        if (const char* env = std::getenv("NBHARNESS_SHIM"); env != nullptr) {
            cmd = env;
        }
    }
    if (cmd.empty()) {
        cmd = find_on_path("nbshim");
    }
    auto parts = split_command(cmd);
    if (parts.empty()) {
        return std::nullopt;
    }
    return ShimExecutor(std::move(parts));
}

ExecResponse ShimExecutor::run(const ExecRequest& req) {
    const double budget_s = req.timeout_per_cell_s * static_cast<double>(req.cells.size()) + guard_margin_s;
    const auto line = request_to_json(req).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    const auto proc = run_process(command_, line, std::chrono::milliseconds(static_cast<long long>(budget_s * 1000.0)));
    if (proc.timed_out) {
        crash("shim exceeded its guard deadline of " + std::to_string(budget_s) + " s");
    }
    if (proc.term_signal != 0) {
        crash("shim killed by signal " + std::to_string(proc.term_signal) + ": " + proc.err.substr(0, 500));
    }
    // The response is the last complete line; anything a cell leaked to
    // stdout before it is ignored.
    std::string_view out(proc.out);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) {
        out.remove_suffix(1);
    }
    if (out.empty() || proc.out.back() != '\n') {
        crash("shim produced no response line (exit " + std::to_string(proc.exit_code) + "): " + proc.err.substr(0, 500));
    }
    const auto prev = out.rfind('\n');
    auto resp = parse_exec_response(prev == std::string_view::npos ? out : out.substr(prev + 1), req);
    if (!resp.ok) {
        crash("shim rejected the request: " + proc.err.substr(0, 500));
    }
    if (proc.exit_code != 0) {
        crash("shim answered ok but exited with " + std::to_string(proc.exit_code));
    }
    return resp;
}

}  // namespace nbharness
