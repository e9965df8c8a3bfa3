#include "nbharness/infill.hpp"

#include "nbharness/corpus.hpp"
#include "nbharness/digest.hpp"
#include "nbharness/error.hpp"

namespace nbharness {

std::string_view control_code_token(ControlCode code) noexcept {
    switch (code) {
    case ControlCode::markdown: return "<markdown>";
    case ControlCode::code: return "<code>";
    case ControlCode::function: return "<function>";
    case ControlCode::class_: return "<class>";
    case ControlCode::import: return "<import>";
    }
    return "<code>";
}

std::optional<ControlCode> parse_control_code(std::string_view token) noexcept {
    for (auto c : {ControlCode::markdown, ControlCode::code, ControlCode::function, ControlCode::class_, ControlCode::import}) {
        if (control_code_token(c) == token) {
            return c;
        }
    }
    return std::nullopt;
}

namespace {

std::string_view tag_kind(CellKind kind) { return kind == CellKind::code ? "code" : "markdown"; }

}  // namespace

std::string cell_open_tag(CellKind kind) { return "<cell:" + std::string(tag_kind(kind)) + ">"; }
std::string fill_tag(CellKind kind) { return "<fill:" + std::string(tag_kind(kind)) + ">"; }

std::string serialize_context(const Notebook& nb, std::size_t target_index, std::size_t context_cells,
                              std::optional<std::size_t> lookahead_index, std::optional<ControlCode> leading) {
    if (target_index >= nb.cells.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "target " + std::to_string(target_index) + " of " + std::to_string(nb.cells.size()) + " cells");
    }
    if (lookahead_index && *lookahead_index >= nb.cells.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "lookahead cell " + std::to_string(*lookahead_index));
    }
    std::string out;
    auto block = [&out](std::string_view text) {
        if (!out.empty()) {
            out += '\n';
        }
        out += text;
    };
    if (leading) {
        block(control_code_token(*leading));
    }
    const std::size_t used = std::min(context_cells, target_index);
    for (std::size_t i = target_index - used; i < target_index; ++i) {
        const auto& cell = nb.cells[i];
        block(cell_open_tag(cell.kind) + "\n" + cell.source);
    }
    block(fill_tag(nb.cells[target_index].kind));
    if (lookahead_index) {
        const auto& cell = nb.cells[*lookahead_index];
        block(cell_open_tag(cell.kind) + "\n" + cell.source);
    }
    return out;
}

std::string serialize_context(const Notebook& nb, std::size_t target_index, const InfillConfig& cfg) {
    std::optional<std::size_t> next;
    if (cfg.lookahead && target_index + 1 < nb.cells.size()) {
        next = target_index + 1;
    }
    return serialize_context(nb, target_index, cfg.context_cells, next, cfg.leading_control_code);
}

std::vector<InfillExample> emit_infill_examples(const Notebook& nb, const InfillConfig& cfg) {
    std::vector<InfillExample> out;
    out.reserve(nb.cells.size());
    const auto digest = to_hex(dedup_key(nb));
    for (const auto& cell : nb.cells) {
        InfillExample ex;
        ex.source = serialize_context(nb, cell.index, cfg);
        ex.target = cell.source;
        ex.target_kind = cell.kind == CellKind::code ? CellKind::code : CellKind::markdown;
        ex.notebook_digest = digest;
        ex.cell_index = cell.index;
        ex.context_used = std::min(cfg.context_cells, cell.index);
        ex.lookahead_used = cfg.lookahead && cell.index + 1 < nb.cells.size();
        out.push_back(std::move(ex));
    }
    return out;
}

std::string emit_eval_prompt(const Problem& p, const Notebook& nb, const InfillConfig& cfg) {
    std::optional<std::size_t> lookahead;
    if (cfg.lookahead) {
        lookahead = p.grading_cell_index;
    }
    return serialize_context(nb, p.solution_cell_index, cfg.context_cells, lookahead, cfg.leading_control_code);
}

nlohmann::json infill_to_json(const InfillExample& ex) {
    return {{"source", ex.source},       {"target", ex.target},         {"target_kind", cell_kind_name(ex.target_kind)},
            {"notebook", ex.notebook_digest}, {"cell_index", ex.cell_index}, {"c", ex.context_used},
            {"lookahead", ex.lookahead_used}};
}

}  // namespace nbharness
