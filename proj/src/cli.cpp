#include "nbharness/cli.hpp"

#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "nbharness/corpus.hpp"
#include "nbharness/curation.hpp"
#include "nbharness/error.hpp"
#include "nbharness/evalharness.hpp"
#include "nbharness/executor.hpp"
#include "nbharness/genprovider.hpp"
#include "nbharness/infill.hpp"
#include "nbharness/io.hpp"
#include "nbharness/manifest.hpp"
#include "nbharness/parallel.hpp"

namespace fs = std::filesystem;

namespace nbharness {

namespace {

struct ScanFlags {
    std::string root;
    std::string holdout;
    bool markdown_focused = false;
    std::size_t repo_depth = 2;
};

void add_scan_flags(CLI::App* cmd, ScanFlags& f, bool with_filter) {
    cmd->add_option("--root", f.root, "Corpus root (owner/name/... layout)")->required();
    cmd->add_option("--holdout", f.holdout, "File of repository ids to exclude, one per line");
    if (with_filter) {
        cmd->add_flag("--markdown-focused", f.markdown_focused, "Keep only notebooks with >= 1 code cell and >= 1/3 markdown cells");
    }
    cmd->add_option("--repo-depth", f.repo_depth, "Leading path components forming the repository id")->capture_default_str();
}

ScanOptions scan_options(const ScanFlags& f, std::size_t workers) {
    ScanOptions opts;
    if (!f.holdout.empty()) {
        opts.holdout = HoldoutList::load(f.holdout);
    }
    opts.markdown_focused = f.markdown_focused;
    opts.repo_depth = f.repo_depth;
    opts.workers = workers;
    return opts;
}

json stats_to_json(const CorpusStats& s) {
    return {{"repo_count", s.repo_count},
            {"notebook_count", s.notebook_count},
            {"unique_notebook_count", s.unique_notebook_count},
            {"cell_count", s.cell_count},
            {"code_cell_count", s.code_cell_count},
            {"markdown_cell_count", s.markdown_cell_count},
            {"raw_cell_count", s.raw_cell_count},
            {"markdown_cell_share", s.markdown_cell_share},
            {"skipped", s.skipped},
            {"holdout_excluded", s.holdout_excluded},
            {"filtered_out", s.filtered_out}};
}

std::vector<std::size_t> parse_ks(const std::string& text) {
    std::vector<std::size_t> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            const long long k = std::stoll(item, &used);
            if (used != item.size() || k < 1) {
                throw std::invalid_argument(item);
            }
            ks.push_back(static_cast<std::size_t>(k));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgs, "bad k value '" + item + "'");
        }
    }
    if (ks.empty()) {
        throw Error(ErrorCode::InvalidArgs, "no k values given");
    }
    return ks;
}

fs::path resolve_ref(const fs::path& ref, const std::string& root) {
    if (ref.is_absolute() || root.empty()) {
        return ref;
    }
    return fs::path(root) / ref;
}

// Notebooks referenced by problems, parsed once each.
class NotebookCache {
public:
    explicit NotebookCache(std::string root) : root_(std::move(root)) {}

    const Notebook& get(const fs::path& ref) {
        std::lock_guard lock(mu_);
        auto it = cache_.find(ref);
        if (it == cache_.end()) {
            it = cache_.emplace(ref, load_notebook(resolve_ref(ref, root_))).first;
        }
        return it->second;
    }

private:
    std::string root_;
    std::mutex mu_;
    std::map<fs::path, Notebook> cache_;
};

json config_snapshot(const CLI::App* cmd) {
    json cfg = json::object();
    for (const auto* opt : cmd->get_options()) {
        const auto name = opt->get_single_name();
        if (name.empty() || name == "help") {
            continue;
        }
        const auto& results = opt->results();
        if (!results.empty()) {
            cfg[name] = results.size() == 1 ? json(results.front()) : json(results);
        } else if (!opt->get_default_str().empty()) {
            cfg[name] = opt->get_default_str();
        }
    }
    return cfg;
}

class Output {
public:
    Output(const std::vector<std::string>& args, const CLI::App* cmd) {
        manifest_.command_line = args;
        manifest_.config = config_snapshot(cmd);
        manifest_.started_at = utc_timestamp();
    }

    void input(const fs::path& p) { add_input(manifest_, p); }

    void write(const fs::path& path, std::string_view bytes) {
        write_file(path, bytes);
        write_manifest(manifest_, path);
    }

private:
    RunManifest manifest_;
};

std::unique_ptr<Executor> make_executor(const std::string& shim_cmd) {
    auto shim = ShimExecutor::discover(shim_cmd);
    if (!shim) {
        return nullptr;
    }
    return std::make_unique<ShimExecutor>(std::move(*shim));
}

std::size_t exec_workers(std::size_t requested) { return requested == 0 ? default_workers(8) : requested; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Curate executable notebook problems, emit cell-infilling data and score completions with pass@k", "nbharness"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);
    std::size_t workers = 0;
    app.add_option("--workers", workers, "Parallel width of every stage (0 = logical CPUs; execution capped at 8)")
        ->capture_default_str();

    // scan
    ScanFlags scan_f;
    std::string scan_stats_out, scan_out;
    auto* scan = app.add_subcommand("scan", "Walk a corpus tree, deduplicate and report statistics");
    add_scan_flags(scan, scan_f, true);
    scan->add_option("--stats-out", scan_stats_out, "Write CorpusStats JSON here (default: stdout)");
    scan->add_option("--out", scan_out, "Write one JSONL record per surviving notebook");

    // curate
    ScanFlags cur_f;
    std::string cur_out, cur_report, cur_shim;
    bool cur_no_exec = false, cur_scaffold = false;
    double cur_timeout = 600.0;
    std::optional<std::size_t> cur_max_context;
    auto* curate = app.add_subcommand("curate", "Extract problem/grading-cell pairs from executable notebooks");
    add_scan_flags(curate, cur_f, false);
    curate->add_option("--out", cur_out, "problems.jsonl")->required();
    curate->add_flag("--no-exec", cur_no_exec, "Skip the executability filter");
    curate->add_option("--timeout-s", cur_timeout, "Per-cell execution limit")->capture_default_str()->check(CLI::PositiveNumber);
    curate->add_option("--report", cur_report, "Write the CurationReport JSON here");
    curate->add_option("--shim-cmd", cur_shim, "Execution shim command (overrides $NBHARNESS_SHIM)");
    curate->add_flag("--scaffold", cur_scaffold, "Notebooks are student releases without reference solutions");
    curate->add_option("--max-context-cells", cur_max_context, "Record at most this many context cells per problem");

    // emit-infill
    ScanFlags inf_f;
    std::size_t inf_c = 3;
    bool inf_lookahead = false;
    std::string inf_out, inf_control;
    auto* emit_infill = app.add_subcommand("emit-infill", "Emit one cell-infilling example per cell of every unique notebook");
    add_scan_flags(emit_infill, inf_f, true);
    emit_infill->add_option("--c", inf_c, "Context cells before the target")->capture_default_str();
    emit_infill->add_flag("--lookahead", inf_lookahead, "Append the cell following the target");
    emit_infill->add_option("--control-code", inf_control, "Prefix every source with a reserved control code")
        ->check(CLI::IsMember({"<markdown>", "<code>", "<function>", "<class>", "<import>"}));
    emit_infill->add_option("--out", inf_out, "train.jsonl")->required();

    // emit-prompts
    std::string pr_problems, pr_out, pr_root;
    std::size_t pr_c = 3;
    bool pr_lookahead = false;
    auto* emit_prompts = app.add_subcommand("emit-prompts", "Build evaluation prompts for curated problems");
    emit_prompts->add_option("--problems", pr_problems, "problems.jsonl")->required();
    emit_prompts->add_option("--c", pr_c, "Context cells before the solution cell")->capture_default_str();
    emit_prompts->add_flag("--lookahead", pr_lookahead, "Show the grading cell after the fill position");
    emit_prompts->add_option("--root", pr_root, "Base directory for relative notebook references");
    emit_prompts->add_option("--out", pr_out, "prompts.jsonl")->required();

    // generate
    std::string gen_prompts, gen_out;
    GenerationConfig gen_cfg;
    auto* generate = app.add_subcommand("generate", "Sample completions for each prompt from an HTTP generation service");
    generate->add_option("--prompts", gen_prompts, "prompts.jsonl")->required();
    generate->add_option("--endpoint", gen_cfg.endpoint_url, "Generation service URL")->required();
    generate->add_option("--n", gen_cfg.n_samples, "Samples per prompt")->capture_default_str();
    generate->add_option("--temperature", gen_cfg.temperature)->capture_default_str();
    generate->add_option("--top-p", gen_cfg.top_p)->capture_default_str();
    generate->add_option("--max-new-tokens", gen_cfg.max_new_tokens)->capture_default_str();
    generate->add_option("--auth-env", gen_cfg.auth_token_env_var, "Environment variable holding a bearer token");
    generate->add_option("--out", gen_out, "cands.jsonl")->required();

    // oracle
    std::string or_problems, or_out, or_root;
    bool or_mutate = false;
    auto* oracle = app.add_subcommand("oracle", "Emit the ground-truth solution as the single candidate per problem");
    oracle->add_option("--problems", or_problems, "problems.jsonl")->required();
    oracle->add_option("--root", or_root, "Base directory for relative notebook references");
    oracle->add_flag("--mutate", or_mutate, "Break every candidate with a syntax error");
    oracle->add_option("--out", or_out, "cands.jsonl")->required();

    // evaluate
    std::string ev_problems, ev_cands, ev_ks = "1", ev_out, ev_shim, ev_root;
    double ev_timeout = 60.0;
    bool ev_strip = false, ev_rank = false, ev_reports = false, ev_in_place = false;
    auto* evaluate = app.add_subcommand("evaluate", "Execute candidates in their notebooks and compute pass@k");
    evaluate->add_option("--problems", ev_problems, "problems.jsonl")->required();
    evaluate->add_option("--candidates", ev_cands, "cands.jsonl")->required();
    evaluate->add_option("--k", ev_ks, "Comma-separated k values")->capture_default_str();
    evaluate->add_option("--timeout-s", ev_timeout, "Per-cell execution limit")->capture_default_str()->check(CLI::PositiveNumber);
    evaluate->add_flag("--strip-trailing-asserts", ev_strip, "Drop assertion statements trailing each candidate");
    evaluate->add_flag("--rank-logprob", ev_rank, "Also score the candidate with the best mean token log-probability");
    evaluate->add_flag("--reports", ev_reports, "Include per-candidate execution reports");
    evaluate->add_flag("--in-place-serial", ev_in_place, "Run serially inside the notebook directory (no scratch copy)");
    evaluate->add_option("--shim-cmd", ev_shim, "Execution shim command (overrides $NBHARNESS_SHIM)");
    evaluate->add_option("--root", ev_root, "Base directory for relative notebook references");
    evaluate->add_option("--out", ev_out, "results.jsonl")->required();

    // report
    std::string rep_results, rep_out;
    bool rep_bleu = false;
    auto* report = app.add_subcommand("report", "Aggregate pass@k over problems");
    report->add_option("--results", rep_results, "results.jsonl")->required();
    report->add_flag("--bleu", rep_bleu, "Add the BLEU-proxy curve and its rank correlation with pass rate");
    report->add_option("--out", rep_out, "report.json (default: stdout)");

    // stats
    std::string st_problems, st_root, st_out;
    std::size_t st_depth = 2;
    auto* stats = app.add_subcommand("stats", "Dataset statistics of a problems file");
    stats->add_option("--problems", st_problems, "problems.jsonl")->required();
    stats->add_option("--root", st_root, "Corpus root; enables the repository count");
    stats->add_option("--repo-depth", st_depth)->capture_default_str();
    stats->add_option("--out", st_out, "stats.json (default: stdout)");

    std::vector<const char*> argv;
    argv.push_back("nbharness");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 2;
    }

    std::vector<std::string> command_line{"nbharness"};
    command_line.insert(command_line.end(), args.begin(), args.end());

    try {
        if (scan->parsed()) {
            Output o(command_line, scan);
            o.input(scan_f.root);
            std::vector<json> rows;
            auto result = scan_corpus(scan_f.root, scan_options(scan_f, workers));
            if (!scan_out.empty()) {
                for (const auto& item : result.notebooks) {
                    const auto counts = cell_counts(item.notebook);
                    rows.push_back({{"path", item.relative_path.generic_string()},
                                    {"repo_id", item.notebook.repo_id},
                                    {"digest", to_hex(item.key)},
                                    {"unique", item.first_occurrence},
                                    {"code", counts.code},
                                    {"markdown", counts.markdown},
                                    {"raw", counts.raw},
                                    {"markdown_focused", markdown_focus_filter(item.notebook)}});
                }
                o.write(scan_out, to_jsonl(rows));
            }
            const auto stats_text = stats_to_json(result.stats).dump(2) + "\n";
            if (scan_stats_out.empty()) {
                out << stats_text;
            } else {
                o.write(scan_stats_out, stats_text);
            }
            return 0;
        }

        if (curate->parsed()) {
            Output o(command_line, curate);
            o.input(cur_f.root);
            std::vector<Notebook> notebooks;
            for (auto& item : scan_corpus(cur_f.root, scan_options(cur_f, workers)).notebooks) {
                if (item.first_occurrence) {
                    item.notebook.source_path = item.notebook.source_path.lexically_normal();
                    notebooks.push_back(std::move(item.notebook));
                }
            }
            CurationConfig cfg;
            cfg.cell_timeout_s = cur_timeout;
            cfg.require_execution = !cur_no_exec;
            cfg.ground_truth_available = !cur_scaffold;
            cfg.max_context_cells_recorded = cur_max_context;
            cfg.workers = exec_workers(workers);
            std::unique_ptr<Executor> executor;
            if (cfg.require_execution) {
                executor = make_executor(cur_shim);
            }
            auto result = curation_pipeline(notebooks, cfg, executor.get());
            for (const auto& d : result.discarded) {
                err << "discarded " << d << "\n";
            }
            std::vector<json> rows;
            for (const auto& p : result.problems) {
                rows.push_back(problem_to_json(p));
            }
            o.write(cur_out, to_jsonl(rows));
            const auto rep_text = report_to_json(result.report).dump(2) + "\n";
            if (!cur_report.empty()) {
                o.write(cur_report, rep_text);
            } else {
                err << rep_text;
            }
            return 0;
        }

        if (emit_infill->parsed()) {
            Output o(command_line, emit_infill);
            o.input(inf_f.root);
            InfillConfig cfg;
            cfg.context_cells = inf_c;
            cfg.lookahead = inf_lookahead;
            if (!inf_control.empty()) {
                cfg.leading_control_code = parse_control_code(inf_control);
            }
            std::vector<json> rows;
            for (const auto& item : scan_corpus(inf_f.root, scan_options(inf_f, workers)).notebooks) {
                if (!item.first_occurrence) {
                    continue;
                }
                for (const auto& ex : emit_infill_examples(item.notebook, cfg)) {
                    rows.push_back(infill_to_json(ex));
                }
            }
            o.write(inf_out, to_jsonl(rows));
            return 0;
        }

        if (emit_prompts->parsed()) {
            Output o(command_line, emit_prompts);
            o.input(pr_problems);
            InfillConfig cfg;
            cfg.context_cells = pr_c;
            cfg.lookahead = pr_lookahead;
            NotebookCache notebooks(pr_root);
            std::vector<json> rows;
            for (const auto& p : load_problems(pr_problems)) {
                rows.push_back({{"problem_id", p.problem_id},
                                {"prompt", emit_eval_prompt(p, notebooks.get(p.notebook_ref), cfg)},
                                {"c", pr_c},
                                {"lookahead", pr_lookahead}});
            }
            o.write(pr_out, to_jsonl(rows));
            return 0;
        }

        if (generate->parsed()) {
            Output o(command_line, generate);
            o.input(gen_prompts);
            gen_cfg.validate();
            std::vector<std::pair<std::string, std::string>> prompts;
            for_each_jsonl(gen_prompts, [&](const json& obj, std::size_t line) {
                if (!obj.contains("problem_id") || !obj.contains("prompt") || !obj["prompt"].is_string()) {
                    throw Error(ErrorCode::ParseError, gen_prompts + ":" + std::to_string(line) + ": need problem_id and prompt", line);
                }
                prompts.emplace_back(obj["problem_id"].get<std::string>(), obj["prompt"].get<std::string>());
            });
            std::vector<CandidateSet> sets(prompts.size());
            parallel_for(prompts.size(), workers == 0 ? default_workers() : workers, [&](std::size_t i) {
                sets[i] = {prompts[i].first, http_generate(prompts[i].second, gen_cfg)};
            });
            std::vector<json> rows;
            for (const auto& cs : sets) {
                rows.push_back(candidate_set_to_json(cs));
            }
            o.write(gen_out, to_jsonl(rows));
            return 0;
        }

        if (oracle->parsed()) {
            Output o(command_line, oracle);
            o.input(or_problems);
            NotebookCache notebooks(or_root);
            std::vector<json> rows;
            for (const auto& p : load_problems(or_problems)) {
                rows.push_back(candidate_set_to_json(oracle_provider(p, notebooks.get(p.notebook_ref), or_mutate)));
            }
            o.write(or_out, to_jsonl(rows));
            return 0;
        }

        if (evaluate->parsed()) {
            Output o(command_line, evaluate);
            o.input(ev_problems);
            o.input(ev_cands);
            const auto ks = parse_ks(ev_ks);
            const auto problems = load_problems(ev_problems);
            std::map<std::string, CandidateSet> by_id;
            for (auto& cs : load_candidates(ev_cands)) {
                by_id.emplace(cs.problem_id, std::move(cs));
            }
            auto executor = make_executor(ev_shim);
            if (!executor) {
                throw Error(ErrorCode::ExecutorUnavailable, "no shim: set NBHARNESS_SHIM, pass --shim-cmd or put nbshim on PATH");
            }
            NotebookCache notebooks(ev_root);

            struct Job {
                std::size_t problem;
                std::size_t candidate;
            };
            std::vector<Job> jobs;
            std::vector<const CandidateSet*> sets(problems.size(), nullptr);
            for (std::size_t i = 0; i < problems.size(); ++i) {
                auto it = by_id.find(problems[i].problem_id);
                if (it == by_id.end()) {
                    err << "no candidates for " << problems[i].problem_id << "; skipped\n";
                    continue;
                }
                sets[i] = &it->second;
                for (std::size_t c = 0; c < it->second.candidates.size(); ++c) {
                    jobs.push_back({i, c});
                }
            }
            std::vector<ExecutionReport> reports(jobs.size());
            std::vector<std::string> texts(jobs.size());
            EvalOptions opts{ev_timeout, ev_in_place};
            parallel_for(jobs.size(), ev_in_place ? 1 : exec_workers(workers), [&](std::size_t j) {
                const auto& p = problems[jobs[j].problem];
                const auto& nb = notebooks.get(p.notebook_ref);
                texts[j] = sets[jobs[j].problem]->candidates[jobs[j].candidate].text;
                if (ev_strip) {
                    texts[j] = strip_trailing_asserts(texts[j]);
                }
                reports[j] = evaluate_candidate(nb, p, texts[j], *executor, opts);
            });

            std::vector<json> rows;
            std::size_t j = 0;
            for (std::size_t i = 0; i < problems.size(); ++i) {
                if (sets[i] == nullptr) {
                    continue;
                }
                const auto& p = problems[i];
                const auto& reference = notebooks.get(p.notebook_ref).cells[p.solution_cell_index].source;
                const std::size_t n = sets[i]->candidates.size();
                std::size_t c = 0;
                double bleu_sum = 0.0;
                json per_candidate = json::array();
                std::vector<bool> passed;
                for (std::size_t k = 0; k < n; ++k, ++j) {
                    passed.push_back(reports[j].passed);
                    c += reports[j].passed ? 1 : 0;
                    bleu_sum += bleu_proxy(texts[j], reference);
                    if (ev_reports) {
                        per_candidate.push_back(execution_report_to_json(reports[j]));
                    }
                }
                const auto r = make_pass_at_k_result(p.problem_id, n, c, ks);
                json pass_at = json::object();
                for (const auto& [k, v] : r.pass_at) {
                    pass_at[std::to_string(k)] = v;
                }
                json row = {{"problem_id", p.problem_id}, {"n", n}, {"c", c}, {"pass_at", pass_at},
                            {"mean_bleu", bleu_sum / static_cast<double>(n)}};
                if (ev_rank) {
                    const auto best = rank_by_logprob(*sets[i]);
                    row["ranked_index"] = best;
                    row["ranked_passed"] = static_cast<bool>(passed[best]);
                }
                if (ev_reports) {
                    row["reports"] = std::move(per_candidate);
                }
                rows.push_back(std::move(row));
            }
            o.write(ev_out, to_jsonl(rows));
            return 0;
        }

        if (report->parsed()) {
            Output o(command_line, report);
            o.input(rep_results);
            std::vector<PassAtKResult> results;
            std::vector<std::string> ids;
            std::vector<double> rates, bleus;
            std::optional<std::set<std::size_t>> common_ks;
            std::size_t ranked_total = 0, ranked_passed = 0;
            bool all_ranked = true;
            for_each_jsonl(rep_results, [&](const json& row, std::size_t line) {
                try {
                    PassAtKResult r;
                    r.problem_id = row.at("problem_id").get<std::string>();
                    r.n = row.at("n").get<std::size_t>();
                    r.c = row.at("c").get<std::size_t>();
                    std::set<std::size_t> ks;
                    for (const auto& [k, v] : row.at("pass_at").items()) {
                        ks.insert(std::stoul(k));
                    }
                    if (!common_ks) {
                        common_ks = ks;
                    } else {
                        std::set<std::size_t> both;
                        std::set_intersection(common_ks->begin(), common_ks->end(), ks.begin(), ks.end(),
                                              std::inserter(both, both.begin()));
                        common_ks = both;
                    }
                    if (row.contains("ranked_passed")) {
                        ++ranked_total;
                        ranked_passed += row["ranked_passed"].get<bool>() ? 1 : 0;
                    } else {
                        all_ranked = false;
                    }
                    ids.push_back(r.problem_id);
                    rates.push_back(r.n == 0 ? 0.0 : static_cast<double>(r.c) / static_cast<double>(r.n));
                    bleus.push_back(row.value("mean_bleu", 0.0));
                    results.push_back(std::move(r));
                } catch (const std::exception& e) {
                    throw Error(ErrorCode::ParseError, rep_results + ":" + std::to_string(line) + ": " + e.what(), line);
                }
            });
            std::vector<std::size_t> ks;
            if (common_ks) {
                ks.assign(common_ks->begin(), common_ks->end());
            }
            json doc = {{"problems", results.size()}};
            json pass_at = json::object();
            if (!ks.empty()) {
                for (const auto& [k, v] : aggregate_pass_at_k(results, ks).mean) {
                    pass_at[std::to_string(k)] = v;
                }
            }
            doc["pass_at"] = pass_at;
            if (all_ranked && ranked_total > 0) {
                doc["ranked_pass_rate"] = static_cast<double>(ranked_passed) / static_cast<double>(ranked_total);
            }
            if (rep_bleu) {
                const auto corr = correlation_report(ids, rates, bleus);
                json curve = json::array();
                double mean = 0.0;
                for (const auto& pt : corr.curve) {
                    curve.push_back({{"problem_id", pt.problem_id}, {"pass_rate", pt.pass_rate}, {"mean_bleu", pt.mean_bleu}});
                    mean += pt.mean_bleu;
                }
                doc["bleu_proxy"] = {
                    {"metric", "smoothed BLEU-4 (proxy for CodeBLEU)"},
                    {"mean", corr.curve.empty() ? 0.0 : mean / static_cast<double>(corr.curve.size())},
                    {"spearman", std::isnan(corr.spearman) ? json(nullptr) : json(corr.spearman)},
                    {"curve", std::move(curve)}};
            }
            const auto text = doc.dump(2) + "\n";
            if (rep_out.empty()) {
                out << text;
            } else {
                o.write(rep_out, text);
            }
            return 0;
        }

        if (stats->parsed()) {
            Output o(command_line, stats);
            o.input(st_problems);
            const auto problems = load_problems(st_problems);
            std::map<std::string, std::vector<const Problem*>> by_nb;
            for (const auto& p : problems) {
                by_nb[p.notebook_ref.generic_string()].push_back(&p);
            }
            std::size_t asserts = 0, data_files = 0, nb_data = 0, prob_data = 0;
            std::set<std::string> repos;
            for (const auto& [ref, ps] : by_nb) {
                std::set<std::size_t> gradings;
                for (const auto* p : ps) {
                    if (gradings.insert(p->grading_cell_index).second) {
                        asserts += p->assert_count;
                    }
                }
                data_files += ps.front()->data_files.size();
                if (ps.front()->data_dependent) {
                    ++nb_data;
                    prob_data += ps.size();
                }
                if (!st_root.empty()) {
                    const auto rel = fs::absolute(ref).lexically_normal().lexically_relative(fs::absolute(st_root).lexically_normal());
                    repos.insert(derive_repo_id(rel, st_depth));
                }
            }
            json doc = {{"notebooks", by_nb.size()},
                        {"problems", problems.size()},
                        {"total_asserts", asserts},
                        {"data_files", data_files},
                        {"notebooks_referencing_data", nb_data},
                        {"problems_in_data_dependent_notebooks", prob_data}};
            if (!st_root.empty()) {
                doc["repos"] = repos.size();
            }
            const auto text = doc.dump(2) + "\n";
            if (st_out.empty()) {
                out << text;
            } else {
                o.write(st_out, text);
            }
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace nbharness
