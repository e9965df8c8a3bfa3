#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "nbharness/error.hpp"
#include "nbharness/genprovider.hpp"
#include "test_support.hpp"

using namespace nbharness;

namespace {

ErrorCode error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::Io;
}

// Local generation service. `handler` sees the parsed request and the attempt number.
class MockService {
public:
    using Handler = std::function<void(const json&, int, httplib::Response&)>;

    explicit MockService(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            handler_(json::parse(req.body), ++attempts, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockService() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/generate"; }

    std::atomic<int> attempts{0};
    std::string last_auth;

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

GenerationConfig config_for(const std::string& url, std::size_t n) {
    GenerationConfig cfg;
    cfg.endpoint_url = url;
    cfg.n_samples = n;
    cfg.initial_backoff = std::chrono::milliseconds(5);
    return cfg;
}

void reply(httplib::Response& res, std::size_t count) {
    json body = {{"completions", json::array()}};
    for (std::size_t i = 0; i < count; ++i) {
        body["completions"].push_back({{"text", "x = " + std::to_string(i)}, {"mean_token_logprob", -0.1 * double(i)}});
    }
    res.set_content(body.dump(), "application/json");
}

}  // namespace

TEST_SUITE("genprovider") {

TEST_CASE("returns n completions and sends the request fields") {
    json seen;
    MockService svc([&](const json& req, int, httplib::Response& res) {
        seen = req;
        reply(res, req["n"].get<std::size_t>() + 2);
    });
    setenv("NBH_TEST_TOKEN", "sekret", 1);
    auto cfg = config_for(svc.url(), 3);
    cfg.auth_token_env_var = "NBH_TEST_TOKEN";
    const auto out = http_generate("<fill:code>", cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[2].text == "x = 2");
    CHECK(out[1].mean_token_logprob == doctest::Approx(-0.1));
    CHECK(seen["prompt"] == "<fill:code>");
    CHECK(seen["n"] == 3);
    CHECK(seen["max_new_tokens"] == 512);
    CHECK(svc.last_auth == "Bearer sekret");
}

TEST_CASE("retries 5xx then succeeds") {
    MockService svc([](const json&, int attempt, httplib::Response& res) {
        if (attempt < 3) {
            res.status = 503;
        } else {
            reply(res, 2);
        }
    });
    CHECK(http_generate("p", config_for(svc.url(), 2)).size() == 2);
    CHECK(svc.attempts == 3);
}

TEST_CASE("failure kinds") {
    MockService bad([](const json&, int, httplib::Response& res) { res.status = 400; });
    CHECK(error_of([&] { http_generate("p", config_for(bad.url(), 1)); }) == ErrorCode::BadResponse);
    CHECK(bad.attempts == 1);

    MockService garbage([](const json&, int, httplib::Response& res) { res.set_content("{\"nope\": 1}", "application/json"); });
    CHECK(error_of([&] { http_generate("p", config_for(garbage.url(), 1)); }) == ErrorCode::BadResponse);

    MockService shortish([](const json&, int, httplib::Response& res) { reply(res, 1); });
    CHECK(error_of([&] { http_generate("p", config_for(shortish.url(), 4)); }) == ErrorCode::ShortResponse);

    MockService down([](const json&, int, httplib::Response& res) { res.status = 500; });
    CHECK(error_of([&] { http_generate("p", config_for(down.url(), 1)); }) == ErrorCode::EndpointUnreachable);
    CHECK(down.attempts == 3);

    std::string closed_url;
    {
        MockService gone([](const json&, int, httplib::Response&) {});
        closed_url = gone.url();
    }
    CHECK(error_of([&] { http_generate("p", config_for(closed_url, 1)); }) == ErrorCode::EndpointUnreachable);
}

TEST_CASE("config validation") {
    auto cfg = config_for("http://127.0.0.1:1/x", 0);
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgs);
    cfg.n_samples = 1;
    cfg.top_p = 1.5;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgs);
}

TEST_CASE("candidate files") {
    nbh_test::TempDir tmp;
    const auto path = tmp.path() / "cands.jsonl";
    const std::vector<CandidateSet> sets{{"p1", {{"a", -0.5}, {"b", std::nullopt}}}, {"p2", {{"c", -1.0}}}};
    save_candidates(path, sets);
    CHECK(load_candidates(path) == sets);

    write_file(path, "{\"problem_id\": \"p\", \"candidates\": [{\"text\": \"x\"}]}\n{broken\n");
    try {
        load_candidates(path);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.line() == std::optional<std::size_t>(2));
    }
    const std::string row = "{\"problem_id\": \"p\", \"candidates\": [{\"text\": \"x\"}]}\n";
    write_file(path, row + row);
    CHECK(error_of([&] { load_candidates(path); }) == ErrorCode::DuplicateProblem);
}

TEST_CASE("oracle provider") {
    const auto nb = load_notebook(nbh_test::corpus_dir() / "uni-a/ds-course/hw3_strings.ipynb");
    const auto p = curate_problems(nb).front();
    const auto cs = oracle_provider(p, nb);
    REQUIRE(cs.candidates.size() == 1);
    CHECK(cs.candidates[0].text == nb.cells[p.solution_cell_index].source);
    const auto broken = oracle_provider(p, nb, true);
    CHECK(broken.candidates[0].text == nb.cells[p.solution_cell_index].source + "\n(");
}

}  // TEST_SUITE
