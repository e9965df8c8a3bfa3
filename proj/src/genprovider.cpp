#include "nbharness/genprovider.hpp"

#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "nbharness/error.hpp"
#include "nbharness/io.hpp"

namespace nbharness {

void GenerationConfig::validate() const {
    if (n_samples < 1) {
        throw Error(ErrorCode::InvalidArgs, "n_samples must be >= 1");
    }
    if (!(temperature > 0.0)) {
        throw Error(ErrorCode::InvalidArgs, "temperature must be > 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgs, "top_p must be in (0, 1]");
    }
    if (max_attempts < 1) {
        throw Error(ErrorCode::InvalidArgs, "max_attempts must be >= 1");
    }
}

json candidate_set_to_json(const CandidateSet& cs) {
    json cands = json::array();
    for (const auto& c : cs.candidates) {
        json o = {{"text", c.text}};
        if (c.mean_token_logprob) {
            o["mean_token_logprob"] = *c.mean_token_logprob;
        }
        cands.push_back(std::move(o));
    }
    return {{"problem_id", cs.problem_id}, {"candidates", std::move(cands)}};
}

namespace {

Candidate candidate_from_json(const json& j) {
    Candidate c;
    c.text = j.at("text").get<std::string>();
    if (auto lp = j.find("mean_token_logprob"); lp != j.end() && !lp->is_null()) {
        c.mean_token_logprob = lp->get<double>();
    }
    return c;
}

}  // namespace

CandidateSet candidate_set_from_json(const json& j) {
    try {
        CandidateSet cs;
        cs.problem_id = j.at("problem_id").get<std::string>();
        const auto& cands = j.at("candidates");
        if (!cands.is_array() || cands.empty()) {
            throw Error(ErrorCode::ParseError, "'candidates' must be a non-empty array");
        }
        for (const auto& c : cands) {
            cs.candidates.push_back(candidate_from_json(c));
        }
        return cs;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("candidate record: ") + e.what());
    }
}

std::vector<CandidateSet> load_candidates(const std::filesystem::path& path) {
    std::vector<CandidateSet> sets;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](const json& obj, std::size_t line) {
        CandidateSet cs;
        try {
            cs = candidate_set_from_json(obj);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
        }
        if (!seen.insert(cs.problem_id).second) {
            throw Error(ErrorCode::DuplicateProblem, path.string() + ":" + std::to_string(line) + ": " + cs.problem_id, line);
        }
        sets.push_back(std::move(cs));
    });
    return sets;
}

void save_candidates(const std::filesystem::path& path, const std::vector<CandidateSet>& sets) {
    std::vector<json> rows;
    rows.reserve(sets.size());
    for (const auto& cs : sets) {
        rows.push_back(candidate_set_to_json(cs));
    }
    write_file(path, to_jsonl(rows));
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidArgs, "endpoint URL needs a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<Candidate> parse_completions(const std::string& body, std::size_t n) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadResponse, std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("completions") || !doc["completions"].is_array()) {
        throw Error(ErrorCode::BadResponse, "response lacks a 'completions' array");
    }
    std::vector<Candidate> out;
    for (const auto& c : doc["completions"]) {
        if (!c.is_object() || !c.contains("text") || !c["text"].is_string()) {
            throw Error(ErrorCode::BadResponse, "completion without string 'text'");
        }
        if (c.contains("mean_token_logprob") && !c["mean_token_logprob"].is_null() && !c["mean_token_logprob"].is_number()) {
            throw Error(ErrorCode::BadResponse, "non-numeric mean_token_logprob");
        }
        out.push_back(candidate_from_json(c));
    }
    if (out.size() < n) {
        throw Error(ErrorCode::ShortResponse, "asked for " + std::to_string(n) + " completions, got " + std::to_string(out.size()));
    }
    out.resize(n);
    return out;
}

}  // namespace

std::vector<Candidate> http_generate(std::string_view prompt, const GenerationConfig& cfg) {
    cfg.validate();
    if (cfg.endpoint_url.empty()) {
        throw Error(ErrorCode::InvalidArgs, "no endpoint URL configured");
    }
    const auto ep = split_url(cfg.endpoint_url);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(cfg.request_timeout);
    client.set_write_timeout(std::chrono::seconds(30));

    httplib::Headers headers;
    if (!cfg.auth_token_env_var.empty()) {
        if (const char* token = std::getenv(cfg.auth_token_env_var.c_str()); token != nullptr && *token != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    const json payload = {{"prompt", prompt},
                          {"n", cfg.n_samples},
                          {"temperature", cfg.temperature},
                          {"top_p", cfg.top_p},
                          {"max_new_tokens", cfg.max_new_tokens}};
    const auto body = payload.dump(-1, ' ', false, json::error_handler_t::replace);

    std::string last_failure;
    auto backoff = cfg.initial_backoff;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw Error(ErrorCode::BadResponse, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
        } else {
            return parse_completions(res->body, cfg.n_samples);
        }
        if (attempt < cfg.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::EndpointUnreachable,
                cfg.endpoint_url + " after " + std::to_string(cfg.max_attempts) + " attempts: " + last_failure);
}

CandidateSet oracle_provider(const Problem& p, const Notebook& nb, bool mutate) {
    if (p.solution_cell_index >= nb.cells.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "problem " + p.problem_id);
    }
    auto text = nb.cells[p.solution_cell_index].source;
    if (mutate) {
        // On its own line so a trailing comment cannot swallow it.
        if (!text.empty() && text.back() != '\n') {
            text += '\n';
        }
        text += "(";
    }
    return {p.problem_id, {Candidate{std::move(text), std::nullopt}}};
}

}  // namespace nbharness
