#include "nbharness/evalharness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "nbharness/error.hpp"
#include "nbharness/lexer.hpp"

namespace nbharness {

using json = nlohmann::json;

Notebook substitute_solution(const Notebook& nb, const Problem& p, std::string candidate) {
    if (p.solution_cell_index >= nb.cells.size() || p.grading_cell_index >= nb.cells.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "problem " + p.problem_id + " does not fit a notebook of " +
                                                    std::to_string(nb.cells.size()) + " cells");
    }
    Notebook out = nb;
    out.cells[p.solution_cell_index].source = std::move(candidate);
    return out;
}

ExecutionReport evaluate_candidate(const Notebook& nb, const Problem& p, std::string_view candidate, Executor& executor,
                                   const EvalOptions& options) {
    const auto sub = substitute_solution(nb, p, std::string(candidate));
    ExecRequest req;
    req.cells = exec_cells(sub, p.grading_cell_index);
    req.timeout_per_cell_s = options.timeout_s;

    std::optional<ScratchDir> scratch;
    const auto home = nb.source_path.parent_path();
    if (options.in_place) {
        req.workdir = home.empty() ? std::filesystem::path(".") : home;
    } else {
        scratch.emplace(home);
        req.workdir = scratch->path();
    }
    const auto resp = executor.run(req);

    ExecutionReport report;
    bool all_ok = true;
    for (const auto& r : resp.results) {
        CellOutcome o;
        o.cell_index = static_cast<std::size_t>(std::stoul(r.id));
        o.status = r.status;
        o.error_type = r.error_type;
        o.error_message = r.error_message;
        o.duration_s = r.duration_s;
        all_ok = all_ok && r.status == CellStatus::ok;
        report.per_cell.push_back(std::move(o));
    }
    report.passed = all_ok && !req.cells.empty() && resp.results.size() == req.cells.size() &&
                    report.per_cell.back().cell_index == p.grading_cell_index;
    return report;
}

json execution_report_to_json(const ExecutionReport& r) {
    json cells = json::array();
    for (const auto& o : r.per_cell) {
        json c = {{"cell_index", o.cell_index}, {"status", cell_status_name(o.status)}, {"duration_s", o.duration_s}};
        if (o.error_type) {
            c["error_type"] = *o.error_type;
        }
        if (o.error_message) {
            c["error_message"] = *o.error_message;
        }
        cells.push_back(std::move(c));
    }
    return {{"per_cell", std::move(cells)}, {"passed", r.passed}};
}

std::string strip_trailing_asserts(std::string_view candidate) {
    const auto stmts = lex::split_statements(candidate);
    std::size_t keep = stmts.size();
    while (keep > 0 && stmts[keep - 1].indent == 0 && lex::is_assertion(stmts[keep - 1])) {
        --keep;
    }
    if (keep == stmts.size()) {
        return std::string(candidate);
    }
    if (keep == 0) {
        return {};
    }
    return std::string(candidate.substr(0, stmts[keep - 1].end));
}

// ------------------------------------------------------------------ pass@k

double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
    if (k < 1 || k > n || c > n) {
        throw Error(ErrorCode::InvalidArgs,
                    "pass@k needs 1 <= k <= n and c <= n (n=" + std::to_string(n) + ", c=" + std::to_string(c) +
                        ", k=" + std::to_string(k) + ")");
    }
    if (c == 0) {
        return 0.0;
    }
    if (n - c < k) {
        return 1.0;
    }
    if (k == 1) {
        return static_cast<double>(c) / static_cast<double>(n);
    }
    double miss = 1.0;
    const double kd = static_cast<double>(k);
    for (std::size_t i = n - c + 1; i <= n; ++i) {
        miss *= 1.0 - kd / static_cast<double>(i);
    }
    return 1.0 - miss;
}

PassAtKResult make_pass_at_k_result(std::string problem_id, std::size_t n, std::size_t c, const std::vector<std::size_t>& ks) {
    PassAtKResult r{std::move(problem_id), n, c, {}};
    for (auto k : ks) {
        r.pass_at[k] = pass_at_k(n, c, k);
    }
    return r;
}

PassAtKTable aggregate_pass_at_k(const std::vector<PassAtKResult>& results, const std::vector<std::size_t>& ks) {
    if (ks.empty()) {
        throw Error(ErrorCode::InvalidArgs, "no k values requested");
    }
    const auto max_k = *std::max_element(ks.begin(), ks.end());
    PassAtKTable table;
    table.problems = results.size();
    for (const auto& r : results) {
        if (r.n < max_k) {
            throw Error(ErrorCode::InvalidArgs,
                        "problem " + r.problem_id + " has n=" + std::to_string(r.n) + " < k=" + std::to_string(max_k));
        }
    }
    if (results.empty()) {
        return table;
    }
    for (auto k : ks) {
        double sum = 0.0;
        for (const auto& r : results) {
            sum += pass_at_k(r.n, r.c, k);
        }
        table.mean[k] = sum / static_cast<double>(results.size());
    }
    return table;
}

std::size_t rank_by_logprob(const CandidateSet& cs) {
    if (cs.candidates.empty()) {
        throw Error(ErrorCode::InvalidArgs, "candidate set " + cs.problem_id + " is empty");
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
        const auto& lp = cs.candidates[i].mean_token_logprob;
        if (!lp) {
            throw Error(ErrorCode::MissingLogprob, cs.problem_id + " candidate " + std::to_string(i));
        }
        if (*lp > *cs.candidates[best].mean_token_logprob) {
            best = i;
        }
    }
    return best;
}

// -------------------------------------------------------------------- BLEU

std::vector<std::string> bleu_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto word = [](unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; };
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (word(c)) {
            const std::size_t start = i;
            while (i < text.size() && word(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
            out.emplace_back(text.substr(start, i - start));
        } else {
            out.emplace_back(1, static_cast<char>(c));
            ++i;
        }
    }
    return out;
}

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                          toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

}  // namespace

double bleu_proxy(std::string_view candidate, std::string_view reference) {
    const auto cand = bleu_tokens(candidate);
    const auto ref = bleu_tokens(reference);
    if (cand.empty()) {
        return ref.empty() ? 1.0 : 0.0;
    }
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cc = ngram_counts(cand, n);
        const auto rc = ngram_counts(ref, n);
        std::size_t matches = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : cc) {
            total += count;
            if (auto it = rc.find(gram); it != rc.end()) {
                matches += std::min(count, it->second);
            }
        }
        double precision;
        if (n == 1) {
            if (matches == 0) {
                return 0.0;
            }
            precision = static_cast<double>(matches) / static_cast<double>(total);
        } else {
            precision = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
        }
        log_sum += std::log(precision);
    }
    const double c = static_cast<double>(cand.size());
    const double r = static_cast<double>(ref.size());
    const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
    return bp * std::exp(log_sum / 4.0);
}

// ----------------------------------------------------------- correlation

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlation_report(const std::vector<std::string>& problem_ids, const std::vector<double>& pass_rates,
                                     const std::vector<double>& mean_bleu) {
    if (problem_ids.size() != pass_rates.size() || pass_rates.size() != mean_bleu.size()) {
        throw Error(ErrorCode::LengthMismatch, "problem ids, pass rates and BLEU scores differ in length");
    }
    CorrelationReport rep;
    for (std::size_t i = 0; i < problem_ids.size(); ++i) {
        rep.curve.push_back({problem_ids[i], pass_rates[i], mean_bleu[i]});
    }
    std::sort(rep.curve.begin(), rep.curve.end(), [](const CorrelationPoint& a, const CorrelationPoint& b) {
        if (a.pass_rate != b.pass_rate) {
            return a.pass_rate > b.pass_rate;
        }
        return a.problem_id < b.problem_id;
    });
    rep.spearman = spearman(pass_rates, mean_bleu);
    return rep;
}

}  // namespace nbharness
