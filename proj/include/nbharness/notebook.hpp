#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nbharness {

enum class CellKind { code, markdown, raw };

std::string_view cell_kind_name(CellKind kind) noexcept;

// nbgrader's per-cell metadata (cell.metadata.nbgrader).
struct NbgraderMeta {
    std::string grade_id;
    bool is_solution = false;
    bool is_grade = false;
    double points = 0.0;
    bool locked = false;

    bool operator==(const NbgraderMeta&) const = default;
};

struct Cell {
    std::size_t index = 0;
    CellKind kind = CellKind::code;
    std::string source;
    std::optional<NbgraderMeta> nbgrader;
    std::optional<std::string> cell_id;

    bool operator==(const Cell&) const = default;
};

struct FormatVersion {
    int major = 4;
    int minor = 0;

    bool operator==(const FormatVersion&) const = default;
};

struct Notebook {
    FormatVersion format_version;
    std::string kernel_language = "python";
    std::vector<Cell> cells;
    std::filesystem::path source_path;
    std::string repo_id;

    bool operator==(const Notebook&) const = default;
};

struct CellCounts {
    std::size_t code = 0;
    std::size_t markdown = 0;
    std::size_t raw = 0;

    std::size_t total() const noexcept { return code + markdown + raw; }
    bool operator==(const CellCounts&) const = default;
};

/// Parses an nbformat v4 document. Stored outputs are dropped; list-of-lines
/// sources are concatenated verbatim. Unknown cell types become raw cells.
/// Throws Error{MalformedJson | UnsupportedVersion | MissingCells}.
Notebook parse_notebook(std::string_view bytes, const std::filesystem::path& path = {},
                        std::string repo_id = {});

/// Reads and parses a notebook file.
Notebook load_notebook(const std::filesystem::path& path, std::string repo_id = {});

/// Emits nbformat v4 JSON with empty outputs and null execution counts.
std::string serialize_notebook(const Notebook& nb);

CellCounts cell_counts(const Notebook& nb) noexcept;

}  // namespace nbharness
