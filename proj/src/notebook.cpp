#include "nbharness/notebook.hpp"

#include <cmath>

#include "nbharness/error.hpp"
#include "nbharness/io.hpp"

namespace nbharness {

std::string_view cell_kind_name(CellKind kind) noexcept {
    switch (kind) {
    case CellKind::code: return "code";
    case CellKind::markdown: return "markdown";
    case CellKind::raw: return "raw";
    }
    return "raw";
}

namespace {

std::string join_source(const json& src) {
    if (src.is_string()) {
        return src.get<std::string>();
    }
    std::string out;
    if (src.is_array()) {
        for (const auto& piece : src) {
            if (piece.is_string()) {
                out += piece.get_ref<const std::string&>();
            }
        }
    }
    return out;
}

// Splits after each '\n', the layout Jupyter itself writes.
json split_lines(const std::string& source) {
    json lines = json::array();
    std::size_t start = 0;
    while (start < source.size()) {
        auto nl = source.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(source.substr(start));
            break;
        }
        lines.push_back(source.substr(start, nl - start + 1));
        start = nl + 1;
    }
    return lines;
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        return fallback;
    }
}

std::optional<NbgraderMeta> read_nbgrader(const json& cell, std::size_t index) {
    auto meta = cell.find("metadata");
    if (meta == cell.end() || !meta->is_object()) {
        return std::nullopt;
    }
    auto nbg = meta->find("nbgrader");
    if (nbg == meta->end() || !nbg->is_object()) {
        return std::nullopt;
    }
    NbgraderMeta m;
    m.grade_id = value_or<std::string>(*nbg, "grade_id", "");
    m.is_solution = value_or<bool>(*nbg, "solution", false);
    m.is_grade = value_or<bool>(*nbg, "grade", false);
    m.points = std::max(0.0, value_or<double>(*nbg, "points", 0.0));
    m.locked = value_or<bool>(*nbg, "locked", false);
    if (m.is_grade && m.grade_id.empty()) {
        m.grade_id = "cell-" + std::to_string(index);
    }
    return m;
}

CellKind read_kind(const json& cell) {
    const auto type = value_or<std::string>(cell, "cell_type", "");
    if (type == "code") {
        return CellKind::code;
    }
    if (type == "markdown") {
        return CellKind::markdown;
    }
    return CellKind::raw;
}

}  // namespace

Notebook parse_notebook(std::string_view bytes, const std::filesystem::path& path, std::string repo_id) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedJson, path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::MalformedJson, path.string() + ": top level is not an object");
    }
    auto major = doc.find("nbformat");
    if (major == doc.end() || !major->is_number_integer()) {
        throw Error(ErrorCode::UnsupportedVersion, path.string() + ": missing nbformat");
    }
    if (major->get<int>() != 4) {
        throw Error(ErrorCode::UnsupportedVersion,
                    path.string() + ": nbformat " + std::to_string(major->get<int>()));
    }
    auto cells = doc.find("cells");
    if (cells == doc.end() || !cells->is_array()) {
        throw Error(ErrorCode::MissingCells, path.string());
    }

    Notebook nb;
    nb.format_version = {4, value_or<int>(doc, "nbformat_minor", 0)};
    nb.source_path = path;
    nb.repo_id = std::move(repo_id);

    if (auto meta = doc.find("metadata"); meta != doc.end() && meta->is_object()) {
        std::string lang;
        if (auto ks = meta->find("kernelspec"); ks != meta->end() && ks->is_object()) {
            lang = value_or<std::string>(*ks, "language", "");
        }
        if (lang.empty()) {
            if (auto li = meta->find("language_info"); li != meta->end() && li->is_object()) {
                lang = value_or<std::string>(*li, "name", "");
            }
        }
        if (!lang.empty()) {
            nb.kernel_language = lang;
        }
    }

    nb.cells.reserve(cells->size());
    for (const auto& raw : *cells) {
        Cell cell;
        cell.index = nb.cells.size();
        if (raw.is_object()) {
            cell.kind = read_kind(raw);
            if (auto src = raw.find("source"); src != raw.end()) {
                cell.source = join_source(*src);
            }
            cell.nbgrader = read_nbgrader(raw, cell.index);
            if (auto id = raw.find("id"); id != raw.end() && id->is_string()) {
                cell.cell_id = id->get<std::string>();
            }
        } else {
            cell.kind = CellKind::raw;
        }
        nb.cells.push_back(std::move(cell));
    }
    return nb;
}

Notebook load_notebook(const std::filesystem::path& path, std::string repo_id) {
    return parse_notebook(read_file(path), path, std::move(repo_id));
}

std::string serialize_notebook(const Notebook& nb) {
    json cells = json::array();
    for (const auto& cell : nb.cells) {
        json c;
        c["cell_type"] = cell_kind_name(cell.kind);
        c["source"] = split_lines(cell.source);
        json meta = json::object();
        if (cell.nbgrader) {
            const auto& g = *cell.nbgrader;
            json points = g.points;
            if (std::floor(g.points) == g.points && std::abs(g.points) < 1e15) {
                points = static_cast<long long>(g.points);
            }
            meta["nbgrader"] = {{"grade_id", g.grade_id}, {"solution", g.is_solution}, {"grade", g.is_grade},
                                {"points", points},       {"locked", g.locked}};
        }
        c["metadata"] = std::move(meta);
        if (cell.cell_id) {
            c["id"] = *cell.cell_id;
        }
        if (cell.kind == CellKind::code) {
            c["outputs"] = json::array();
            c["execution_count"] = nullptr;
        }
        cells.push_back(std::move(c));
    }
    json doc;
    doc["nbformat"] = 4;
    doc["nbformat_minor"] = nb.format_version.minor;
    doc["metadata"] = {{"kernelspec", {{"language", nb.kernel_language}}},
                       {"language_info", {{"name", nb.kernel_language}}}};
    doc["cells"] = std::move(cells);
    return doc.dump(1, ' ', false, json::error_handler_t::replace) + "\n";
}

CellCounts cell_counts(const Notebook& nb) noexcept {
    CellCounts counts;
    for (const auto& cell : nb.cells) {
        switch (cell.kind) {
        case CellKind::code: ++counts.code; break;
        case CellKind::markdown: ++counts.markdown; break;
        case CellKind::raw: ++counts.raw; break;
        }
    }
    return counts;
}

}  // namespace nbharness
