#include "nbharness/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <mutex>
#include <unordered_set>

#include "nbharness/error.hpp"
#include "nbharness/io.hpp"
#include "nbharness/parallel.hpp"

namespace fs = std::filesystem;

namespace nbharness {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct DigestHash {
    std::size_t operator()(const Digest256& d) const noexcept {
        std::size_t h = 0;
        std::memcpy(&h, d.data(), sizeof(h));
        return h;
    }
};

std::vector<fs::path> list_notebooks(const fs::path& root) {
    std::vector<fs::path> files;
    const auto opts = fs::directory_options::skip_permission_denied;
    for (auto it = fs::recursive_directory_iterator(root, opts); it != fs::recursive_directory_iterator(); ++it) {
        std::error_code ec;
        if (it->is_directory(ec) && it->path().filename() == ".ipynb_checkpoints") {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file(ec) && it->path().extension() == ".ipynb") {
            files.push_back(it->path().lexically_relative(root));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

HoldoutList::HoldoutList(std::initializer_list<std::string> ids) {
    for (const auto& id : ids) {
        insert(id);
    }
}

void HoldoutList::insert(std::string_view repo_id) {
    auto id = trim(repo_id);
    if (!id.empty()) {
        ids_.insert(ascii_lower(id));
    }
}

bool HoldoutList::contains(std::string_view repo_id) const { return ids_.count(ascii_lower(trim(repo_id))) > 0; }

HoldoutList HoldoutList::parse(std::string_view text) {
    HoldoutList list;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        list.insert(line);
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return list;
}

HoldoutList HoldoutList::load(const fs::path& path) { return parse(read_file(path)); }

Digest256 dedup_key(const Notebook& nb) {
    Sha256 h;
    h.update_u64(nb.cells.size());
    for (const auto& cell : nb.cells) {
        h.update(cell_kind_name(cell.kind).substr(0, 1));
        h.update_u64(cell.source.size());
        h.update(cell.source);
    }
    return h.finish();
}

bool markdown_focus_filter(const Notebook& nb) noexcept {
    const auto counts = cell_counts(nb);
    return counts.code >= 1 && 3 * counts.markdown >= counts.total();
}

std::string derive_repo_id(const fs::path& relative_path, std::size_t depth) {
    std::string id;
    std::size_t taken = 0;
    for (const auto& part : relative_path.parent_path()) {
        if (taken == depth || part == ".") {
            break;
        }
        if (!id.empty()) {
            id += '/';
        }
        id += part.string();
        ++taken;
    }
    return id.empty() ? "." : id;
}

CorpusStats for_each_notebook(const fs::path& root, const ScanOptions& options,
                              const std::function<void(ScannedNotebook&&)>& sink) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::RootNotFound, root.string());
    }
    const auto files = list_notebooks(root);

    std::mutex mu;
    CorpusStats stats;
    std::unordered_set<Digest256, DigestHash> seen;
    std::set<std::string> repos;

    parallel_for(files.size(), options.workers == 0 ? default_workers() : options.workers, [&](std::size_t i) {
        const auto& rel = files[i];
        const auto repo = derive_repo_id(rel, options.repo_depth);
        if (options.holdout.contains(repo)) {
            std::lock_guard lock(mu);
            ++stats.holdout_excluded;
            return;
        }
        ScannedNotebook item;
        try {
            item.notebook = load_notebook(root / rel, repo);
        } catch (const Error&) {
            std::lock_guard lock(mu);
            ++stats.skipped;
            return;
        }
        if (options.markdown_focused && !markdown_focus_filter(item.notebook)) {
            std::lock_guard lock(mu);
            ++stats.filtered_out;
            return;
        }
        item.key = dedup_key(item.notebook);
        item.relative_path = rel;
        const auto counts = cell_counts(item.notebook);

        std::lock_guard lock(mu);
        ++stats.notebook_count;
        item.first_occurrence = seen.insert(item.key).second;
        if (item.first_occurrence) {
            ++stats.unique_notebook_count;
        }
        repos.insert(repo);
        stats.cell_count += counts.total();
        stats.code_cell_count += counts.code;
        stats.markdown_cell_count += counts.markdown;
        stats.raw_cell_count += counts.raw;
        sink(std::move(item));
    });

    stats.repo_count = repos.size();
    stats.markdown_cell_share =
        stats.cell_count == 0 ? 0.0 : static_cast<double>(stats.markdown_cell_count) / static_cast<double>(stats.cell_count);
    return stats;
}

ScanResult scan_corpus(const fs::path& root, const ScanOptions& options) {
    ScanResult result;
    result.stats = for_each_notebook(root, options, [&](ScannedNotebook&& item) { result.notebooks.push_back(std::move(item)); });
    std::sort(result.notebooks.begin(), result.notebooks.end(),
              [](const ScannedNotebook& a, const ScannedNotebook& b) { return a.relative_path < b.relative_path; });
    std::unordered_set<Digest256, DigestHash> seen;
    for (auto& item : result.notebooks) {
        item.first_occurrence = seen.insert(item.key).second;
    }
    return result;
}

}  // namespace nbharness
