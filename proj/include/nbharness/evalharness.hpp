#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nbharness/curation.hpp"
#include "nbharness/executor.hpp"
#include "nbharness/notebook.hpp"

namespace nbharness {

struct Candidate {
    std::string text;
    std::optional<double> mean_token_logprob;

    bool operator==(const Candidate&) const = default;
};

struct CandidateSet {
    std::string problem_id;
    std::vector<Candidate> candidates;

    bool operator==(const CandidateSet&) const = default;
};

struct CellOutcome {
    std::size_t cell_index = 0;
    CellStatus status = CellStatus::ok;
    std::optional<std::string> error_type;
    std::optional<std::string> error_message;
    double duration_s = 0.0;
};

struct ExecutionReport {
    std::vector<CellOutcome> per_cell;  // stops at the first non-ok cell
    bool passed = false;
};

nlohmann::json execution_report_to_json(const ExecutionReport& r);

struct PassAtKResult {
    std::string problem_id;
    std::size_t n = 0;
    std::size_t c = 0;
    std::map<std::size_t, double> pass_at;
};

/// Teacher forcing: a copy of `nb` whose only change is the source of the
/// problem's solution cell. Throws Error{IndexOutOfRange}.
Notebook substitute_solution(const Notebook& nb, const Problem& p, std::string candidate);

struct EvalOptions {
    double timeout_s = 60.0;
    // Execute directly in the notebook's directory instead of a scratch copy.
    bool in_place = false;
};

/// Runs code cells 0..grading cell of the substituted notebook in one fresh
/// session; nothing after the grading cell executes. Candidate failures and
/// timeouts are reported per cell; a dying shim throws Error{ExecutorCrash}.
ExecutionReport evaluate_candidate(const Notebook& nb, const Problem& p, std::string_view candidate,
                                   Executor& executor, const EvalOptions& options = {});

/// Drops top-level assertion statements after the last non-assertion
/// statement; earlier asserts stay.
std::string strip_trailing_asserts(std::string_view candidate);

/// Unbiased pass@k, 1 - C(n-c, k) / C(n, k), evaluated as
/// 1 - prod_{i=n-c+1}^{n} (1 - k/i). Exactly c/n for k = 1, exactly 0 for
/// c = 0 and exactly 1 when n - c < k. Throws Error{InvalidArgs} unless
/// 1 <= k <= n and c <= n.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

PassAtKResult make_pass_at_k_result(std::string problem_id, std::size_t n, std::size_t c,
                                    const std::vector<std::size_t>& ks);

struct PassAtKTable {
    std::size_t problems = 0;
    std::map<std::size_t, double> mean;  // k -> mean pass@k over problems
};

/// Throws Error{InvalidArgs} when any result has n < max(ks).
PassAtKTable aggregate_pass_at_k(const std::vector<PassAtKResult>& results, const std::vector<std::size_t>& ks);

/// Index of the largest mean token log-probability; lowest index wins ties.
/// Throws Error{MissingLogprob} (or InvalidArgs for an empty set).
std::size_t rank_by_logprob(const CandidateSet& cs);

/// Identifier/number runs are tokens; every other non-space byte is its own token.
std::vector<std::string> bleu_tokens(std::string_view text);

/// Smoothed BLEU-4: unsmoothed unigram precision, add-one smoothing for
/// n = 2..4, uniform weights, brevity penalty exp(1 - r/c) when c < r.
/// A stand-in for CodeBLEU without its syntax and dataflow terms.
double bleu_proxy(std::string_view candidate, std::string_view reference);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// side is constant. Throws Error{LengthMismatch}.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrelationPoint {
    std::string problem_id;
    double pass_rate = 0.0;
    double mean_bleu = 0.0;
};

struct CorrelationReport {
    std::vector<CorrelationPoint> curve;  // descending pass rate, then problem id
    double spearman = 0.0;
};

CorrelationReport correlation_report(const std::vector<std::string>& problem_ids, const std::vector<double>& pass_rates,
                                     const std::vector<double>& mean_bleu);

}  // namespace nbharness
