#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nbharness/curation.hpp"
#include "nbharness/notebook.hpp"

namespace nbharness {

// The five reserved steering tokens. <markdown>/<code> select the target
// kind; the rest are reserved and only emitted on request.
enum class ControlCode { markdown, code, function, class_, import };

std::string_view control_code_token(ControlCode code) noexcept;
std::optional<ControlCode> parse_control_code(std::string_view token) noexcept;

struct InfillConfig {
    std::size_t context_cells = 1;
    bool lookahead = false;
    // Prepended on its own line ahead of the context when set.
    std::optional<ControlCode> leading_control_code;
};

// Block tags of the serialized source. Raw cells are written as markdown.
std::string cell_open_tag(CellKind kind);
std::string fill_tag(CellKind kind);

struct InfillExample {
    std::string source;
    std::string target;
    CellKind target_kind = CellKind::code;  // code or markdown
    std::string notebook_digest;
    std::size_t cell_index = 0;
    std::size_t context_used = 0;
    bool lookahead_used = false;

    bool operator==(const InfillExample&) const = default;
};

nlohmann::json infill_to_json(const InfillExample& ex);

/// Up to C cells before the target (each as `<cell:KIND>` line + source),
/// then `<fill:KIND>`, then optionally the lookahead cell; blocks joined by
/// '\n'. Throws Error{IndexOutOfRange}.
std::string serialize_context(const Notebook& nb, std::size_t target_index, const InfillConfig& cfg);

/// Same layout with an explicit lookahead cell index (nullopt: none).
std::string serialize_context(const Notebook& nb, std::size_t target_index, std::size_t context_cells,
                              std::optional<std::size_t> lookahead_index,
                              std::optional<ControlCode> leading = std::nullopt);

/// One example per cell of the notebook.
std::vector<InfillExample> emit_infill_examples(const Notebook& nb, const InfillConfig& cfg);

/// Prompt for a curated problem. The lookahead cell is the problem's grading
/// cell, wherever it sits, so the tests are visible.
std::string emit_eval_prompt(const Problem& p, const Notebook& nb, const InfillConfig& cfg);

}  // namespace nbharness
