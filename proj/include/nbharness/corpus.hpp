#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nbharness/digest.hpp"
#include "nbharness/notebook.hpp"

namespace nbharness {

struct CorpusStats {
    std::size_t repo_count = 0;
    std::size_t notebook_count = 0;
    std::size_t unique_notebook_count = 0;
    std::size_t cell_count = 0;
    std::size_t code_cell_count = 0;
    std::size_t markdown_cell_count = 0;
    std::size_t raw_cell_count = 0;
    double markdown_cell_share = 0.0;
    std::size_t skipped = 0;           // unparseable files
    std::size_t holdout_excluded = 0;  // parseable files dropped by the holdout list
    std::size_t filtered_out = 0;      // dropped by the markdown-focus filter

    bool operator==(const CorpusStats&) const = default;
};

// Repository ids excluded from a corpus; matching ignores ASCII case.
class HoldoutList {
public:
    HoldoutList() = default;
    HoldoutList(std::initializer_list<std::string> ids);

    void insert(std::string_view repo_id);
    bool contains(std::string_view repo_id) const;
    std::size_t size() const noexcept { return ids_.size(); }

    // One id per line; '#' starts a comment; blank lines ignored.
    static HoldoutList load(const std::filesystem::path& path);
    static HoldoutList parse(std::string_view text);

private:
    std::set<std::string> ids_;
};

struct ScanOptions {
    HoldoutList holdout;
    bool markdown_focused = false;
    std::size_t repo_depth = 2;  // leading path components under root forming the repo id
    std::size_t workers = 0;     // 0 = hardware concurrency
};

struct ScannedNotebook {
    Notebook notebook;
    Digest256 key{};
    std::filesystem::path relative_path;
    bool first_occurrence = true;  // false for later copies (path order) of an already-seen key
};

struct ScanResult {
    std::vector<ScannedNotebook> notebooks;  // sorted by relative path
    CorpusStats stats;
};

/// Order-sensitive digest over each cell's (kind, source); metadata, outputs,
/// ids and the file path do not contribute.
Digest256 dedup_key(const Notebook& nb);

/// At least one code cell and markdown cells make up >= 1/3 of all cells
/// (raw cells count in the denominator). Exact integer comparison.
bool markdown_focus_filter(const Notebook& nb) noexcept;

std::string derive_repo_id(const std::filesystem::path& relative_path, std::size_t depth);

/// Streams every surviving notebook to `sink` (called from worker threads,
/// serialised; arrival order is unspecified) and returns the totals.
/// Throws Error{RootNotFound}.
CorpusStats for_each_notebook(const std::filesystem::path& root, const ScanOptions& options,
                              const std::function<void(ScannedNotebook&&)>& sink);

/// Collects the stream, sorted by path, with first_occurrence decided in path order.
ScanResult scan_corpus(const std::filesystem::path& root, const ScanOptions& options = {});

}  // namespace nbharness
