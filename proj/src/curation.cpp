#include "nbharness/curation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <mutex>

#include "nbharness/corpus.hpp"
#include "nbharness/digest.hpp"
#include "nbharness/error.hpp"
#include "nbharness/io.hpp"
#include "nbharness/lexer.hpp"
#include "nbharness/parallel.hpp"

namespace fs = std::filesystem;

namespace nbharness {

using lex::Statement;
using lex::Token;
using lex::TokenKind;

// ---------------------------------------------------------------- names

namespace {

using TokenSpan = std::vector<Token>;

bool is_open(const Token& t) { return t.is("(") || t.is("[") || t.is("{"); }
bool is_close(const Token& t) { return t.is(")") || t.is("]") || t.is("}"); }

// Splits at top-level occurrences of `sep`.
std::vector<TokenSpan> split_top(const TokenSpan& toks, std::string_view sep) {
    std::vector<TokenSpan> parts(1);
    int depth = 0;
    for (const auto& t : toks) {
        if (is_open(t)) {
            ++depth;
        } else if (is_close(t) && depth > 0) {
            --depth;
        } else if (depth == 0 && t.is(sep)) {
            parts.emplace_back();
            continue;
        }
        parts.back().push_back(t);
    }
    return parts;
}

// True when toks[0] opens a bracket closed by the final token.
bool wrapped(const TokenSpan& toks) {
    if (toks.size() < 2 || !(toks.front().is("(") || toks.front().is("["))) {
        return false;
    }
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (is_open(toks[i])) {
            ++depth;
        } else if (is_close(toks[i])) {
            --depth;
            if (depth == 0) {
                return i + 1 == toks.size();
            }
        }
    }
    return false;
}

void bind_target(TokenSpan toks, NameSet& out) {
    while (wrapped(toks)) {
        toks = TokenSpan(toks.begin() + 1, toks.end() - 1);
    }
    const auto elems = split_top(toks, ",");
    if (elems.size() == 1) {
        auto elem = elems.front();
        if (!elem.empty() && elem.front().is("*")) {
            elem.erase(elem.begin());
        }
        if (elem.size() == 1 && elem[0].kind == TokenKind::name && !lex::is_keyword(elem[0].text)) {
            out.insert(std::string(elem[0].text));
        }
        return;
    }
    for (const auto& elem : elems) {
        if (!elem.empty()) {
            bind_target(elem, out);
        }
    }
}

void bind_import(const TokenSpan& toks, NameSet& out) {
    // import a.b.c [as x], d
    for (const auto& item : split_top(TokenSpan(toks.begin() + 1, toks.end()), ",")) {
        if (item.empty() || item[0].kind != TokenKind::name) {
            continue;
        }
        if (item.size() >= 3 && item[item.size() - 2].text == "as" && item.back().kind == TokenKind::name) {
            out.insert(std::string(item.back().text));
        } else {
            out.insert(std::string(item[0].text));
        }
    }
}

void bind_from_import(const TokenSpan& toks, NameSet& out) {
    // from m import (x [as y], ...)
    auto it = std::find_if(toks.begin(), toks.end(), [](const Token& t) { return t.kind == TokenKind::name && t.text == "import"; });
    if (it == toks.end()) {
        return;
    }
    TokenSpan rest;
    for (++it; it != toks.end(); ++it) {
        if (!it->is("(") && !it->is(")")) {
            rest.push_back(*it);
        }
    }
    for (const auto& item : split_top(rest, ",")) {
        if (item.size() == 1 && item[0].kind == TokenKind::name) {
            out.insert(std::string(item[0].text));
        } else if (item.size() == 3 && item[1].text == "as" && item[2].kind == TokenKind::name) {
            out.insert(std::string(item[2].text));
        }
    }
}

void bind_assignment(const TokenSpan& toks, NameSet& out) {
    const auto segments = split_top(toks, "=");
    if (segments.size() < 2) {
        return;
    }
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        const auto annotated = split_top(segments[i], ":");
        if (annotated.size() == 2 && i == 0) {
            bind_target(annotated[0], out);
        } else if (annotated.size() == 1) {
            bind_target(segments[i], out);
        }
    }
}

}  // namespace

NameSet extract_defined_names(std::string_view code) {
    NameSet names;
    for (const auto& stmt : lex::split_statements(code)) {
        if (stmt.indent != 0 || stmt.tokens.empty()) {
            continue;
        }
        const auto& t = stmt.tokens;
        std::size_t i = 0;
        if (t[0].kind == TokenKind::name && t[0].text == "async" && t.size() > 1) {
            i = 1;
        }
        if (t[i].kind != TokenKind::name) {
            continue;
        }
        const auto head = t[i].text;
        if (head == "def" || head == "class") {
            if (i + 1 < t.size() && t[i + 1].kind == TokenKind::name) {
                names.insert(std::string(t[i + 1].text));
            }
        } else if (head == "import") {
            bind_import(t, names);
        } else if (head == "from") {
            bind_from_import(t, names);
        } else if (!lex::is_keyword(head)) {
            bind_assignment(t, names);
        }
    }
    return names;
}

// ----------------------------------------------------------- assertions

std::vector<AssertionLine> find_assertion_lines(std::string_view code) {
    std::vector<AssertionLine> out;
    for (const auto& stmt : lex::split_statements(code)) {
        if (lex::is_assertion(stmt)) {
            out.push_back({stmt.line, std::string(code.substr(stmt.begin, stmt.end - stmt.begin))});
        }
    }
    return out;
}

NameSet find_assert_references(std::string_view grading, const NameSet& names) {
    NameSet refs;
    for (const auto& stmt : lex::split_statements(grading)) {
        if (!lex::is_assertion(stmt)) {
            continue;
        }
        for (const auto& tok : stmt.tokens) {
            if (tok.kind == TokenKind::name) {
                if (auto it = names.find(std::string(tok.text)); it != names.end()) {
                    refs.insert(*it);
                }
            }
        }
    }
    return refs;
}

// ------------------------------------------------------ data dependencies

namespace {

bool is_loader(std::string_view callee) {
    return callee == "open" || callee.starts_with("read_") || callee.starts_with("load") || callee == "genfromtxt" ||
           callee == "imread";
}

bool is_path_keyword(std::string_view kw) {
    static constexpr std::array<std::string_view, 7> kKeywords{"fname", "file", "filename", "filepath", "filepath_or_buffer",
                                                               "path", "io"};
    return std::find(kKeywords.begin(), kKeywords.end(), kw) != kKeywords.end();
}

bool has_data_extension(std::string_view value) {
    static constexpr std::array<std::string_view, 12> kExt{".csv", ".tsv", ".json", ".txt", ".dat", ".npy",
                                                           ".npz", ".xlsx", ".h5", ".pkl", ".png", ".jpg"};
    std::string lower(value);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::any_of(kExt.begin(), kExt.end(), [&](std::string_view e) { return lower.size() > e.size() && lower.ends_with(e); });
}

std::optional<std::string> as_relative_path(std::string value) {
    if (value.empty() || value.find('\n') != std::string::npos || value.find("://") != std::string::npos) {
        return std::nullopt;
    }
    if (value[0] == '/' || value[0] == '~' || value[0] == '\\') {
        return std::nullopt;
    }
    if (value.size() >= 3 && std::isalpha(static_cast<unsigned char>(value[0])) && value[1] == ':' &&
        (value[2] == '\\' || value[2] == '/')) {
        return std::nullopt;
    }
    while (value.starts_with("./")) {
        value.erase(0, 2);
    }
    if (value.empty()) {
        return std::nullopt;
    }
    return value;
}

struct Frame {
    bool is_call = false;
    std::string_view callee;
    std::size_t arg_index = 0;
};

void scan_statement(const Statement& stmt, std::set<std::string>& out) {
    const auto& t = stmt.tokens;
    std::vector<Frame> stack;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const auto& tok = t[j];
        if (is_open(tok)) {
            Frame f;
            if (tok.is("(") && j > 0 && t[j - 1].kind == TokenKind::name && !lex::is_keyword(t[j - 1].text)) {
                f.is_call = true;
                f.callee = t[j - 1].text;
            }
            stack.push_back(f);
            continue;
        }
        if (is_close(tok)) {
            if (!stack.empty()) {
                stack.pop_back();
            }
            continue;
        }
        if (tok.is(",") && !stack.empty()) {
            ++stack.back().arg_index;
            continue;
        }
        if (tok.kind != TokenKind::string) {
            continue;
        }
        if (lex::is_fstring(tok.text) && tok.text.find('{') != std::string_view::npos) {
            continue;
        }
        auto value = lex::string_literal_value(tok.text);
        bool loader_arg = false;
        if (!stack.empty() && stack.back().is_call && is_loader(stack.back().callee)) {
            const bool ends_arg = j + 1 == t.size() || t[j + 1].is(",") || t[j + 1].is(")");
            const bool first_positional = t[j - 1].is("(") && stack.back().arg_index == 0;
            const bool path_keyword = j >= 3 && t[j - 1].is("=") && t[j - 2].kind == TokenKind::name &&
                                      is_path_keyword(t[j - 2].text) && (t[j - 3].is("(") || t[j - 3].is(","));
            loader_arg = ends_arg && (first_positional || path_keyword);
        }
        if (loader_arg || has_data_extension(value)) {
            if (auto rel = as_relative_path(std::move(value))) {
                out.insert(std::move(*rel));
            }
        }
    }
}

}  // namespace

std::set<std::string> detect_data_dependencies(std::string_view code) {
    std::set<std::string> out;
    for (const auto& stmt : lex::split_statements(code)) {
        scan_statement(stmt, out);
    }
    return out;
}

std::set<std::string> detect_data_dependencies(const Notebook& nb) {
    std::set<std::string> out;
    for (const auto& cell : nb.cells) {
        if (cell.kind == CellKind::code) {
            out.merge(detect_data_dependencies(cell.source));
        }
    }
    return out;
}

// ------------------------------------------------------------- problems

bool has_placeholder_marker(std::string_view source) noexcept {
    return source.find("YOUR CODE HERE") != std::string_view::npos ||
           source.find("raise NotImplementedError") != std::string_view::npos;
}

bool is_solution_cell(const Cell& cell) noexcept {
    if (cell.kind != CellKind::code) {
        return false;
    }
    if (cell.nbgrader) {
        return cell.nbgrader->is_solution;
    }
    return has_placeholder_marker(cell.source);
}

std::vector<Problem> curate_problems(const Notebook& nb, bool ground_truth_available,
                                     std::optional<std::size_t> max_context_cells) {
    std::vector<Problem> problems;
    std::optional<std::string> digest;
    std::optional<std::set<std::string>> data_files;

    for (const auto& sol : nb.cells) {
        if (!is_solution_cell(sol)) {
            continue;
        }
        if (ground_truth_available && has_placeholder_marker(sol.source)) {
            continue;
        }
        auto names = extract_defined_names(sol.source);
        if (names.empty()) {
            continue;
        }
        for (std::size_t g = sol.index + 1; g < nb.cells.size(); ++g) {
            const auto& grading = nb.cells[g];
            if (grading.kind != CellKind::code || is_solution_cell(grading)) {
                continue;
            }
            auto refs = find_assert_references(grading.source, names);
            if (refs.empty()) {
                continue;
            }
            if (!digest) {
                digest = to_hex(dedup_key(nb));
                data_files = detect_data_dependencies(nb);
            }
            Problem p;
            p.problem_id = *digest + ":" + std::to_string(sol.index);
            p.notebook_ref = nb.source_path;
            const std::size_t first =
                max_context_cells && *max_context_cells < sol.index ? sol.index - *max_context_cells : 0;
            for (std::size_t c = first; c < sol.index; ++c) {
                p.context_cell_indices.push_back(c);
            }
            p.solution_cell_index = sol.index;
            p.grading_cell_index = g;
            p.defined_names = std::move(names);
            p.assert_count = find_assertion_lines(grading.source).size();
            p.referenced_names = std::move(refs);
            p.data_files = *data_files;
            p.data_dependent = !p.data_files.empty();
            problems.push_back(std::move(p));
            break;
        }
    }
    return problems;
}

// -------------------------------------------------------------- JSON I/O

nlohmann::json problem_to_json(const Problem& p) {
    return {{"problem_id", p.problem_id},
            {"notebook_ref", p.notebook_ref.generic_string()},
            {"context_cell_indices", p.context_cell_indices},
            {"solution_cell_index", p.solution_cell_index},
            {"grading_cell_index", p.grading_cell_index},
            {"defined_names", p.defined_names},
            {"assert_count", p.assert_count},
            {"referenced_names", p.referenced_names},
            {"data_dependent", p.data_dependent},
            {"data_files", p.data_files}};
}

Problem problem_from_json(const nlohmann::json& j) {
    try {
        Problem p;
        p.problem_id = j.at("problem_id").get<std::string>();
        p.notebook_ref = j.at("notebook_ref").get<std::string>();
        p.context_cell_indices = j.at("context_cell_indices").get<std::vector<std::size_t>>();
        p.solution_cell_index = j.at("solution_cell_index").get<std::size_t>();
        p.grading_cell_index = j.at("grading_cell_index").get<std::size_t>();
        p.defined_names = j.at("defined_names").get<NameSet>();
        p.assert_count = j.at("assert_count").get<std::size_t>();
        p.referenced_names = j.at("referenced_names").get<NameSet>();
        p.data_dependent = j.at("data_dependent").get<bool>();
        p.data_files = j.at("data_files").get<std::set<std::string>>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("problem record: ") + e.what());
    }
}

std::vector<Problem> load_problems(const fs::path& path) {
    std::vector<Problem> out;
    for_each_jsonl(path, [&](const json& obj, std::size_t line) {
        try {
            out.push_back(problem_from_json(obj));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
        }
    });
    return out;
}

nlohmann::json report_to_json(const CurationReport& r) {
    return {{"notebooks_seen", r.notebooks_seen},
            {"notebooks_executable", r.notebooks_executable},
            {"notebooks_with_problems", r.notebooks_with_problems},
            {"repos_with_problems", r.repos_with_problems},
            {"problems", r.problems},
            {"total_asserts", r.total_asserts},
            {"data_files", r.data_files},
            {"notebooks_referencing_data", r.notebooks_referencing_data},
            {"problems_in_data_dependent_notebooks", r.problems_in_data_dependent_notebooks}};
}

// -------------------------------------------------------------- pipeline

ScratchDir::ScratchDir(const fs::path& copy_from) {
    std::string tmpl = (fs::temp_directory_path() / "nbharness-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) {
        throw Error(ErrorCode::Io, "mkdtemp failed under " + fs::temp_directory_path().string());
    }
    path_ = tmpl;
    std::error_code ec;
    fs::copy(copy_from.empty() ? fs::path(".") : copy_from, path_,
             fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
    if (ec) {
        fs::remove_all(path_, ec);
        throw Error(ErrorCode::Io, "cannot copy " + copy_from.string() + " into scratch: " + ec.message());
    }
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::vector<ExecCell> exec_cells(const Notebook& nb, std::optional<std::size_t> last_index) {
    std::vector<ExecCell> cells;
    for (const auto& cell : nb.cells) {
        if (last_index && cell.index > *last_index) {
            break;
        }
        if (cell.kind == CellKind::code) {
            cells.push_back({std::to_string(cell.index), cell.source});
        }
    }
    return cells;
}

namespace {

// Empty string when the notebook ran cleanly, otherwise the reason.
std::string execute_fully(const Notebook& nb, double timeout_s, Executor& executor) {
    auto cells = exec_cells(nb);
    if (cells.empty()) {
        return {};
    }
    ScratchDir scratch(nb.source_path.parent_path());
    ExecRequest req{scratch.path(), std::move(cells), timeout_s, std::nullopt};
    ExecResponse resp;
    try {
        resp = executor.run(req);
    } catch (const Error& e) {
        return e.what();
    }
    for (const auto& r : resp.results) {
        if (r.status != CellStatus::ok) {
            return "cell " + r.id + " " + std::string(cell_status_name(r.status)) +
                   (r.error_type ? " (" + *r.error_type + ")" : std::string());
        }
    }
    if (resp.results.size() != req.cells.size()) {
        return "executor stopped early";
    }
    return {};
}

}  // namespace

CurationResult curation_pipeline(const std::vector<Notebook>& notebooks, const CurationConfig& cfg, Executor* executor) {
    if (cfg.cell_timeout_s <= 0) {
        throw Error(ErrorCode::InvalidArgs, "cell_timeout_s must be positive");
    }
    if (cfg.require_execution && executor == nullptr) {
        throw Error(ErrorCode::ExecutorUnavailable, "execution required but no executor configured");
    }
    struct Outcome {
        bool executable = false;
        std::string reason;
        std::vector<Problem> problems;
    };
    std::vector<Outcome> outcomes(notebooks.size());
    const std::size_t workers = cfg.workers == 0 ? default_workers(8) : cfg.workers;
    parallel_for(notebooks.size(), workers, [&](std::size_t i) {
        auto& o = outcomes[i];
        if (cfg.require_execution) {
            o.reason = execute_fully(notebooks[i], cfg.cell_timeout_s, *executor);
        }
        o.executable = o.reason.empty();
        if (o.executable) {
            o.problems = curate_problems(notebooks[i], cfg.ground_truth_available, cfg.max_context_cells_recorded);
        }
    });

    CurationResult result;
    auto& rep = result.report;
    std::set<std::string> repos;
    rep.notebooks_seen = notebooks.size();
    for (std::size_t i = 0; i < notebooks.size(); ++i) {
        auto& o = outcomes[i];
        if (!o.executable) {
            result.discarded.push_back(notebooks[i].source_path.generic_string() + ": " + o.reason);
            continue;
        }
        ++rep.notebooks_executable;
        if (o.problems.empty()) {
            continue;
        }
        ++rep.notebooks_with_problems;
        repos.insert(notebooks[i].repo_id);
        rep.problems += o.problems.size();
        std::set<std::size_t> grading_cells;
        for (const auto& p : o.problems) {
            if (grading_cells.insert(p.grading_cell_index).second) {
                rep.total_asserts += p.assert_count;
            }
        }
        const auto& files = o.problems.front().data_files;
        rep.data_files += files.size();
        if (!files.empty()) {
            ++rep.notebooks_referencing_data;
            rep.problems_in_data_dependent_notebooks += o.problems.size();
        }
        for (auto& p : o.problems) {
            result.problems.push_back(std::move(p));
        }
    }
    rep.repos_with_problems = repos.size();
    return result;
}

}  // namespace nbharness
