#include <doctest.h>

#include <sstream>

#include "nbharness/cli.hpp"
#include "nbharness/genprovider.hpp"
#include "nbharness/manifest.hpp"
#include "nbharness/subprocess.hpp"
#include "test_support.hpp"

using namespace nbharness;

namespace {

struct Run {
    int rc;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int rc = run_cli(args, out, err);
    return {rc, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    CHECK(run({"--help"}).rc == 0);
    CHECK(run({"evaluate", "--help"}).rc == 0);
    CHECK(run({}).rc == 2);
    CHECK(run({"frobnicate"}).rc == 2);
    CHECK(run({"scan"}).rc == 2);  // --root is required
    CHECK(run({"evaluate", "--problems", "p", "--candidates", "c", "--out", "o", "--timeout-s", "-1"}).rc == 2);
    const auto missing = run({"scan", "--root", "/nonexistent/root"});
    CHECK(missing.rc == 1);
    CHECK(missing.err.find("RootNotFound") != std::string::npos);
}

TEST_CASE("scan prints stats and writes a manifest next to each output") {
    nbh_test::TempDir tmp;
    const auto listing = (tmp.path() / "nbs.jsonl").string();
    const auto r = run({"scan", "--root", nbh_test::corpus_dir().string(), "--out", listing, "--workers", "2"});
    REQUIRE(r.rc == 0);
    const auto stats = json::parse(r.out);
    CHECK(stats["notebook_count"] == 12);
    CHECK(stats["repo_count"] == 4);
    std::size_t rows = 0;
    for_each_jsonl(listing, [&](const json& row, std::size_t) {
        CHECK(row["unique"] == true);
        ++rows;
    });
    CHECK(rows == 12);
    const auto manifest = json::parse(read_file(manifest_path_for(listing)));
    CHECK(manifest["tool_version"] == kToolVersion);
    CHECK(manifest["output_digest"].get<std::string>().size() == 64);
    CHECK(manifest["command_line"][1] == "scan");
    CHECK(manifest["config"]["root"] == nbh_test::corpus_dir().string());
}

TEST_CASE("curate without a shim is a domain error unless --no-exec") {
    nbh_test::TempDir tmp;
    const auto out = (tmp.path() / "problems.jsonl").string();
    const auto root = nbh_test::corpus_dir().string();
    if (!nbh_test::shim_configured() && find_on_path("nbshim").empty()) {
        const auto r = run({"curate", "--root", root, "--out", out});
        CHECK(r.rc == 1);
        CHECK(r.err.find("ExecutorUnavailable") != std::string::npos);
    }
    const auto r = run({"curate", "--root", root, "--out", out, "--no-exec", "--report", (tmp.path() / "r.json").string()});
    REQUIRE(r.rc == 0);
    CHECK(json::parse(read_file(tmp.path() / "r.json"))["problems"] == 18);
}

TEST_CASE("prompts, oracle, report and stats without execution") {
    nbh_test::TempDir tmp;
    const auto w = [&](const char* name) { return (tmp.path() / name).string(); };
    const auto golden = (nbh_test::golden_dir() / "problems.jsonl").string();
    const auto root = nbh_test::corpus_dir().string();

    REQUIRE(run({"emit-prompts", "--problems", golden, "--root", root, "--c", "1", "--lookahead", "--out", w("p.jsonl")}).rc == 0);
    CHECK(read_file(w("p.jsonl")) == read_file(nbh_test::golden_dir() / "prompts_c1_lookahead.jsonl"));

    REQUIRE(run({"oracle", "--problems", golden, "--root", root, "--out", w("c.jsonl")}).rc == 0);
    CHECK(load_candidates(w("c.jsonl")).size() == 15);

    write_file(w("res.jsonl"),
               "{\"problem_id\":\"a\",\"n\":4,\"c\":1,\"pass_at\":{\"1\":0.25,\"2\":0.5},\"mean_bleu\":0.2,\"ranked_passed\":true}\n"
               "{\"problem_id\":\"b\",\"n\":4,\"c\":4,\"pass_at\":{\"1\":1.0,\"2\":1.0},\"mean_bleu\":0.9,\"ranked_passed\":false}\n");
    const auto rep = run({"report", "--results", w("res.jsonl"), "--bleu"});
    REQUIRE(rep.rc == 0);
    const auto doc = json::parse(rep.out);
    CHECK(doc["problems"] == 2);
    CHECK(doc["pass_at"]["1"].get<double>() == doctest::Approx(0.625));
    CHECK(doc["pass_at"]["2"].get<double>() == doctest::Approx(0.75));
    CHECK(doc["ranked_pass_rate"].get<double>() == doctest::Approx(0.5));
    CHECK(doc["bleu_proxy"]["curve"][0]["problem_id"] == "b");
    CHECK(doc["bleu_proxy"]["spearman"].get<double>() == doctest::Approx(1.0));

    const auto st = run({"stats", "--problems", golden, "--root", root});
    REQUIRE(st.rc == 0);
    const auto stats = json::parse(st.out);
    CHECK(stats["problems"] == 15);
    CHECK(stats["notebooks"] == 7);
    CHECK(stats["total_asserts"] == 31);
    CHECK(stats["data_files"] == 2);
}

TEST_CASE("emit-infill matches the C=1 golden") {
    nbh_test::TempDir tmp;
    const auto out = (tmp.path() / "train.jsonl").string();
    REQUIRE(run({"emit-infill", "--root", nbh_test::corpus_dir().string(), "--c", "1", "--out", out}).rc == 0);
    CHECK(read_file(out) == read_file(nbh_test::golden_dir() / "infill_c1.jsonl"));
}

TEST_CASE("evaluate rejects bad k values and malformed candidates") {
    nbh_test::TempDir tmp;
    const auto golden = (nbh_test::golden_dir() / "problems.jsonl").string();
    write_file(tmp.path() / "bad.jsonl", "{oops\n");
    const auto r = run({"evaluate", "--problems", golden, "--candidates", (tmp.path() / "bad.jsonl").string(), "--out",
                        (tmp.path() / "r.jsonl").string(), "--shim-cmd", "/bin/false"});
    CHECK(r.rc == 1);
    CHECK(r.err.find("ParseError") != std::string::npos);
    const auto k = run({"evaluate", "--problems", golden, "--candidates", golden, "--k", "1,x", "--out",
                        (tmp.path() / "r.jsonl").string(), "--shim-cmd", "/bin/false"});
    CHECK(k.rc == 1);
}

}  // TEST_SUITE
