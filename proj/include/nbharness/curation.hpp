#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nbharness/executor.hpp"
#include "nbharness/notebook.hpp"

namespace nbharness {

using NameSet = std::set<std::string>;

struct Problem {
    std::string problem_id;  // "<notebook digest>:<solution cell index>"
    std::filesystem::path notebook_ref;
    std::vector<std::size_t> context_cell_indices;
    std::size_t solution_cell_index = 0;
    std::size_t grading_cell_index = 0;
    NameSet defined_names;
    std::size_t assert_count = 0;
    NameSet referenced_names;
    bool data_dependent = false;
    std::set<std::string> data_files;

    bool operator==(const Problem&) const = default;
};

nlohmann::json problem_to_json(const Problem& p);
Problem problem_from_json(const nlohmann::json& j);  // throws Error{ParseError}
std::vector<Problem> load_problems(const std::filesystem::path& path);

struct CurationConfig {
    double cell_timeout_s = 600.0;
    bool require_execution = true;
    std::optional<std::size_t> max_context_cells_recorded;  // nullopt: every preceding cell
    bool ground_truth_available = true;
    std::size_t workers = 0;  // 0 = hardware concurrency, capped at 8
};

struct CurationReport {
    std::size_t notebooks_seen = 0;
    std::size_t notebooks_executable = 0;
    std::size_t notebooks_with_problems = 0;
    std::size_t repos_with_problems = 0;
    std::size_t problems = 0;
    std::size_t total_asserts = 0;
    std::size_t data_files = 0;
    std::size_t notebooks_referencing_data = 0;
    std::size_t problems_in_data_dependent_notebooks = 0;

    bool operator==(const CurationReport&) const = default;
};

nlohmann::json report_to_json(const CurationReport& r);

struct AssertionLine {
    int line_no = 0;  // 1-based line where the statement starts
    std::string text;

    bool operator==(const AssertionLine&) const = default;
};

/// Names bound at top level: def/class, plain and annotated assignment
/// targets (tuple targets included), and import bindings. Lexical and
/// best-effort; malformed code never throws.
NameSet extract_defined_names(std::string_view code);

/// Assertion statements (`assert ...` or calls to an `assert*` helper), with
/// bracket and backslash continuations folded into one statement.
std::vector<AssertionLine> find_assertion_lines(std::string_view code);

/// Members of `names` occurring as identifier tokens inside assertion
/// statements of `grading`. String literals and comments never match.
NameSet find_assert_references(std::string_view grading, const NameSet& names);

std::set<std::string> detect_data_dependencies(std::string_view code);
std::set<std::string> detect_data_dependencies(const Notebook& nb);

/// True when the cell is a solution cell: nbgrader solution flag, or one of
/// nbgrader's scaffold markers when the cell has no nbgrader metadata.
bool is_solution_cell(const Cell& cell) noexcept;
bool has_placeholder_marker(std::string_view source) noexcept;

/// Problem/grading pairs in one notebook. With ground truth available, a
/// solution cell still holding a placeholder scaffold has no reference
/// solution and is skipped.
std::vector<Problem> curate_problems(const Notebook& nb, bool ground_truth_available = true,
                                     std::optional<std::size_t> max_context_cells = std::nullopt);

struct CurationResult {
    std::vector<Problem> problems;  // notebook order, then solution index
    CurationReport report;
    std::vector<std::string> discarded;  // "<path>: <reason>" for stage-1 failures
};

/// Stage 1 executes each notebook top to bottom in a private scratch copy of
/// its directory (when cfg.require_execution), discarding any with a failing
/// or timed-out cell. Stage 2 runs curate_problems on the survivors.
/// Throws Error{ExecutorUnavailable} if execution is required without an executor.
CurationResult curation_pipeline(const std::vector<Notebook>& notebooks, const CurationConfig& cfg,
                                 Executor* executor);

/// Copies `dir` into a fresh directory under the system temp dir and removes
/// it on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::filesystem::path& copy_from);
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

// Code cells [0, last_index] (all code cells when nullopt) as executor cells
// whose ids are the decimal cell indices.
std::vector<ExecCell> exec_cells(const Notebook& nb, std::optional<std::size_t> last_index = std::nullopt);

}  // namespace nbharness
