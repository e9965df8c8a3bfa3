#include <doctest.h>

#include <cmath>
#include <iostream>
#include <random>

#include "nbharness/error.hpp"
#include "nbharness/evalharness.hpp"
#include "test_support.hpp"

using namespace nbharness;

namespace {

bool skip_without_shim(const char* what) {
    if (nbh_test::shim_configured()) {
        return false;
    }
    std::cout << "[SKIP: NBHARNESS_SHIM not set] " << what << std::endl;
    return true;
}

// Textbook formula on tie-free data.
double spearman_no_ties(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = 1;
            for (std::size_t j = 0; j < n; ++j) {
                r[i] += v[j] < v[i] ? 1 : 0;
            }
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    }
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

Problem fixture_problem(const Notebook& nb, std::size_t which = 0) {
    auto ps = curate_problems(nb);
    REQUIRE(ps.size() > which);
    return ps[which];
}

}  // namespace

TEST_SUITE("evalharness") {

TEST_CASE("pass@k edges and errors") {
    CHECK(pass_at_k(10, 0, 5) == 0.0);
    CHECK(pass_at_k(10, 6, 5) == 1.0);
    CHECK(pass_at_k(100, 1, 100) == 1.0);
    CHECK(pass_at_k(5, 2, 3) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), Error);
    CHECK_THROWS_AS(pass_at_k(5, 1, 0), Error);
    CHECK_THROWS_AS(pass_at_k(5, 1, 6), Error);
    CHECK(pass_at_k(200, 37, 100) <= 1.0);
}

TEST_CASE("aggregate") {
    std::vector<PassAtKResult> rs{make_pass_at_k_result("a", 4, 1, {1, 2}), make_pass_at_k_result("b", 4, 3, {1, 2})};
    const auto t = aggregate_pass_at_k(rs, {1, 2});
    CHECK(t.problems == 2);
    CHECK(t.mean.at(1) == doctest::Approx(0.5));
    CHECK(t.mean.at(2) == doctest::Approx((0.5 + 1.0) / 2));
    CHECK_THROWS_AS(aggregate_pass_at_k(rs, {5}), Error);
    CHECK_THROWS_AS(aggregate_pass_at_k(rs, {}), Error);
}

TEST_CASE("log-probability ranking") {
    CandidateSet cs{"p", {{"a", -1.5}, {"b", -0.5}, {"c", -0.5}}};
    CHECK(rank_by_logprob(cs) == 1);
    cs.candidates[2].mean_token_logprob.reset();
    CHECK_THROWS_AS(rank_by_logprob(cs), Error);
    CHECK_THROWS_AS(rank_by_logprob(CandidateSet{"p", {}}), Error);
}

TEST_CASE("bleu tokens and scores") {
    CHECK(bleu_tokens("df['zip'] = f(x_1)") ==
          std::vector<std::string>{"df", "[", "'", "zip", "'", "]", "=", "f", "(", "x_1", ")"});
    CHECK(bleu_proxy("", "") == 1.0);
    CHECK(bleu_proxy("", "x") == 0.0);
    CHECK(bleu_proxy("a", "b") == 0.0);
    // "a b" against "a b c d": every precision is 1 after smoothing, so only the brevity penalty e^(1 - 4/2) remains.
    CHECK(bleu_proxy("a b", "a b c d") == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    const double partial = bleu_proxy("return a + b", "return a - b");
    CHECK(partial > 0.0);
    CHECK(partial < 1.0);
}

TEST_CASE("spearman matches the textbook formula on tie-free data") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + trial % 20;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(i) + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);
            y[i] = std::uniform_real_distribution<double>(0, 1000)(rng);
        }
        std::shuffle(x.begin(), x.end(), rng);
        CHECK(spearman(x, y) == doctest::Approx(spearman_no_ties(x, y)).epsilon(1e-12));
    }
    CHECK(spearman({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 1, 2}, {1, 1, 2}) == doctest::Approx(1.0));
    CHECK(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
    CHECK_THROWS_AS(spearman({1, 2}, {1}), Error);
}

TEST_CASE("correlation report ordering") {
    const auto r = correlation_report({"b", "a", "c"}, {0.5, 0.5, 1.0}, {0.1, 0.2, 0.3});
    REQUIRE(r.curve.size() == 3);
    CHECK(r.curve[0].problem_id == "c");
    CHECK(r.curve[1].problem_id == "a");
    CHECK(r.curve[2].problem_id == "b");
    CHECK_THROWS_AS(correlation_report({"a"}, {1.0, 0.0}, {0.1}), Error);
}

TEST_CASE("strip trailing asserts") {
    CHECK(strip_trailing_asserts("def f():\n    return 1\nassert f() == 1\nassert f()\n") == "def f():\n    return 1");
    CHECK(strip_trailing_asserts("assert x\ny = 1") == "assert x\ny = 1");
    CHECK(strip_trailing_asserts("y = 1") == "y = 1");
    CHECK(strip_trailing_asserts("assert a\nassert b") == "");
    CHECK(strip_trailing_asserts("def g():\n    assert False\n") == "def g():\n    assert False\n");
}

TEST_CASE("substitution changes only the solution cell") {
    const auto nb = load_notebook(nbh_test::corpus_dir() / "uni-a/ds-course/hw3_strings.ipynb");
    const auto p = fixture_problem(nb);
    const auto sub = substitute_solution(nb, p, "def shout(s):\n    return 'X'");
    REQUIRE(sub.cells.size() == nb.cells.size());
    for (std::size_t i = 0; i < nb.cells.size(); ++i) {
        if (i == p.solution_cell_index) {
            CHECK(sub.cells[i].source == "def shout(s):\n    return 'X'");
        } else {
            CHECK(sub.cells[i] == nb.cells[i]);
        }
    }
    auto bad = p;
    bad.solution_cell_index = 99;
    CHECK_THROWS_AS(substitute_solution(nb, bad, ""), Error);
}

TEST_CASE("evaluate a correct, a wrong and a hanging candidate") {
    if (skip_without_shim("evaluate_candidate")) {
        return;
    }
    auto shim = nbh_test::shim_from_env();
    const auto nb = load_notebook(nbh_test::corpus_dir() / "uni-a/ds-course/hw3_strings.ipynb");
    const auto p = fixture_problem(nb, 1);  // whisper, graded at cell 6

    const auto good = evaluate_candidate(nb, p, "def whisper(s):\n    return s.lower()", *shim);
    CHECK(good.passed);
    CHECK(good.per_cell.back().cell_index == p.grading_cell_index);

    const auto wrong = evaluate_candidate(nb, p, "def whisper(s):\n    return s", *shim);
    CHECK_FALSE(wrong.passed);
    REQUIRE(!wrong.per_cell.empty());
    CHECK(wrong.per_cell.back().status == CellStatus::exception);
    CHECK(wrong.per_cell.back().error_type == std::optional<std::string>("AssertionError"));

    EvalOptions quick;
    quick.timeout_s = 1.0;
    const auto hang = evaluate_candidate(nb, p, "import time\ntime.sleep(30)", *shim, quick);
    CHECK_FALSE(hang.passed);
    CHECK(hang.per_cell.back().status == CellStatus::timeout);
    CHECK(hang.per_cell.back().cell_index == p.solution_cell_index);
}

TEST_CASE("data files resolve relative to the notebook directory") {
    if (skip_without_shim("data-dependent evaluation")) {
        return;
    }
    auto shim = nbh_test::shim_from_env();
    const auto nb = load_notebook(nbh_test::corpus_dir() / "uni-a/ds-course/hw2_measurements.ipynb");
    const auto p = fixture_problem(nb);
    CHECK(p.data_dependent);
    const auto r = evaluate_candidate(nb, p, nb.cells[p.solution_cell_index].source, *shim);
    CHECK(r.passed);
}

}  // TEST_SUITE
