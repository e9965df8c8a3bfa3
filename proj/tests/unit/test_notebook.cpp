#include <doctest.h>

#include "nbharness/error.hpp"
#include "nbharness/notebook.hpp"
#include "test_support.hpp"

using namespace nbharness;

namespace {

ErrorCode code_of(const std::string& text) {
    try {
        parse_notebook(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::Io;
}

}  // namespace

TEST_SUITE("notebook") {

TEST_CASE("parses cells, joins list sources and drops outputs") {
    const std::string text = R"({
      "nbformat": 4, "nbformat_minor": 5,
      "metadata": {"kernelspec": {"language": "python"}},
      "cells": [
        {"cell_type": "markdown", "metadata": {}, "source": ["# T\n", "body"]},
        {"cell_type": "code", "id": "abc", "metadata": {"nbgrader": {"solution": true, "grade": false, "grade_id": "s1"}},
         "outputs": [{"output_type": "stream", "name": "stdout", "text": "hi"}], "execution_count": 3,
         "source": "x = 1"},
        {"cell_type": "code", "metadata": {"nbgrader": {"grade": true, "points": -2}}, "outputs": [], "source": ""},
        {"cell_type": "heading", "metadata": {}, "source": "old"}
      ]})";
    const auto nb = parse_notebook(text, "a/b.ipynb", "a/b");
    REQUIRE(nb.cells.size() == 4);
    CHECK(nb.format_version == FormatVersion{4, 5});
    CHECK(nb.cells[0].kind == CellKind::markdown);
    CHECK(nb.cells[0].source == "# T\nbody");
    CHECK(nb.cells[1].cell_id == std::optional<std::string>("abc"));
    REQUIRE(nb.cells[1].nbgrader);
    CHECK(nb.cells[1].nbgrader->is_solution);
    CHECK(nb.cells[1].nbgrader->grade_id == "s1");
    CHECK(nb.cells[2].nbgrader->points == 0.0);
    CHECK(nb.cells[2].nbgrader->grade_id == "cell-2");
    CHECK(nb.cells[3].kind == CellKind::raw);
    CHECK(nb.repo_id == "a/b");
    CHECK(cell_counts(nb) == CellCounts{2, 1, 1});
    for (std::size_t i = 0; i < nb.cells.size(); ++i) {
        CHECK(nb.cells[i].index == i);
    }
}

TEST_CASE("error kinds") {
    CHECK(code_of("{not json") == ErrorCode::MalformedJson);
    CHECK(code_of(R"({"nbformat": 3, "cells": []})") == ErrorCode::UnsupportedVersion);
    CHECK(code_of(R"({"nbformat": 4})") == ErrorCode::MissingCells);
    CHECK(code_of(R"({"nbformat": 4, "cells": {}})") == ErrorCode::MissingCells);
}

TEST_CASE("kernel language falls back to language_info") {
    const auto nb = parse_notebook(R"({"nbformat": 4, "metadata": {"language_info": {"name": "julia"}}, "cells": []})");
    CHECK(nb.kernel_language == "julia");
}

TEST_CASE("serialize round-trips every fixture notebook") {
    for (const auto& nb : nbh_test::corpus_notebooks()) {
        auto again = parse_notebook(serialize_notebook(nb), nb.source_path, nb.repo_id);
        CHECK(again == nb);
    }
}

TEST_CASE("serialized code cells carry empty outputs") {
    Notebook nb;
    Cell c;
    c.source = "a\nb\n";
    nb.cells.push_back(c);
    const auto doc = json::parse(serialize_notebook(nb));
    CHECK(doc["cells"][0]["outputs"] == json::array());
    CHECK(doc["cells"][0]["execution_count"].is_null());
    CHECK(doc["cells"][0]["source"] == json({"a\n", "b\n"}));
}

}  // TEST_SUITE
