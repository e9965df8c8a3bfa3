#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nbharness/curation.hpp"
#include "nbharness/evalharness.hpp"
#include "nbharness/notebook.hpp"

namespace nbharness {

struct GenerationConfig {
    std::size_t n_samples = 100;
    double temperature = 0.8;
    double top_p = 0.95;
    std::size_t max_new_tokens = 512;
    std::string endpoint_url;
    std::string auth_token_env_var;  // bearer token read from this variable when non-empty

    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};  // doubled after each failed attempt
    std::chrono::seconds request_timeout{300};

    void validate() const;  // throws Error{InvalidArgs}
};

nlohmann::json candidate_set_to_json(const CandidateSet& cs);
CandidateSet candidate_set_from_json(const nlohmann::json& j);  // throws Error{ParseError}

/// Reads the candidates JSONL file. Throws Error{ParseError} (with the
/// offending line number) or Error{DuplicateProblem}.
std::vector<CandidateSet> load_candidates(const std::filesystem::path& path);
void save_candidates(const std::filesystem::path& path, const std::vector<CandidateSet>& sets);

/// POSTs {prompt, n, temperature, top_p, max_new_tokens} and expects
/// {completions: [{text, mean_token_logprob?}, ...]}. Transport failures and
/// 5xx responses are retried with exponential backoff up to
/// cfg.max_attempts. Returns exactly cfg.n_samples completions.
/// Throws Error{EndpointUnreachable | BadResponse | ShortResponse}.
std::vector<Candidate> http_generate(std::string_view prompt, const GenerationConfig& cfg);

/// The ground-truth solution as the only candidate. With `mutate`, an
/// unclosed "(" line is appended so the candidate cannot compile.
CandidateSet oracle_provider(const Problem& p, const Notebook& nb, bool mutate = false);

}  // namespace nbharness
