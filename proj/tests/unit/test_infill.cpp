#include <doctest.h>

#include "nbharness/curation.hpp"
#include "nbharness/error.hpp"
#include "nbharness/infill.hpp"
#include "test_support.hpp"

using namespace nbharness;

namespace {

Notebook small() {
    return parse_notebook(R"({"nbformat": 4, "cells": [
        {"cell_type": "markdown", "metadata": {}, "source": "Q"},
        {"cell_type": "code", "metadata": {}, "outputs": [], "source": "x=1"},
        {"cell_type": "raw", "metadata": {}, "source": "R"},
        {"cell_type": "code", "metadata": {}, "outputs": [], "source": "y=2"}]})");
}

}  // namespace

TEST_SUITE("infill") {

TEST_CASE("layout") {
    const auto nb = small();
    InfillConfig cfg;
    CHECK(serialize_context(nb, 1, cfg) == "<cell:markdown>\nQ\n<fill:code>");
    cfg.lookahead = true;
    CHECK(serialize_context(nb, 1, cfg) == "<cell:markdown>\nQ\n<fill:code>\n<cell:markdown>\nR");
    CHECK(serialize_context(nb, 3, cfg) == "<cell:markdown>\nR\n<fill:code>");
    cfg.context_cells = 3;
    cfg.lookahead = false;
    CHECK(serialize_context(nb, 0, cfg) == "<fill:markdown>");
    cfg.leading_control_code = ControlCode::function;
    CHECK(serialize_context(nb, 2, cfg) == "<function>\n<cell:markdown>\nQ\n<cell:code>\nx=1\n<fill:markdown>");
    CHECK_THROWS_AS(serialize_context(nb, 4, cfg), Error);
}

TEST_CASE("examples: one per cell, raw targets are markdown") {
    InfillConfig cfg;
    cfg.context_cells = 2;
    cfg.lookahead = true;
    const auto ex = emit_infill_examples(small(), cfg);
    REQUIRE(ex.size() == 4);
    CHECK(ex[2].target == "R");
    CHECK(ex[2].target_kind == CellKind::markdown);
    CHECK(ex[0].context_used == 0);
    CHECK(ex[3].context_used == 2);
    CHECK(ex[1].lookahead_used);
    CHECK_FALSE(ex[3].lookahead_used);
    CHECK(ex[0].notebook_digest.size() == 64);
}

TEST_CASE("control codes") {
    for (auto code : {ControlCode::markdown, ControlCode::code, ControlCode::function, ControlCode::class_,
                      ControlCode::import}) {
        CHECK(parse_control_code(control_code_token(code)) == code);
    }
    CHECK(control_code_token(ControlCode::class_) == "<class>");
    CHECK_FALSE(parse_control_code("<nope>"));
}

TEST_CASE("eval prompt shows the grading cell even when it is not adjacent") {
    const auto nb = load_notebook(nbh_test::corpus_dir() / "uni-a/ds-course/hw3_strings.ipynb");
    const auto ps = curate_problems(nb);
    REQUIRE(ps.size() == 2);
    InfillConfig cfg;
    cfg.context_cells = 0;
    cfg.lookahead = false;
    CHECK(emit_eval_prompt(ps[0], nb, cfg) == "<fill:code>");
    cfg.lookahead = true;
    CHECK(emit_eval_prompt(ps[0], nb, cfg) ==
          "<fill:code>\n<cell:code>\nassert shout('hi') == 'HI!'\nassert shout('') == '!'");
}

}  // TEST_SUITE
