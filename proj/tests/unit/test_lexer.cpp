#include <doctest.h>

#include "nbharness/lexer.hpp"

using namespace nbharness::lex;

TEST_SUITE("lexer") {

TEST_CASE("brackets and backslashes fold into one statement") {
    const auto stmts = split_statements("x = [1,\n     2]\ny = 1 + \\\n    2\nz = 3; w = 4\n");
    REQUIRE(stmts.size() == 4);
    CHECK(stmts[0].line == 1);
    CHECK(stmts[1].line == 3);
    CHECK(stmts[2].line == 5);
    CHECK(stmts[3].line == 5);
    CHECK_FALSE(stmts[3].starts_logical_line);
}

TEST_CASE("indent is the column of the first token") {
    const auto stmts = split_statements("def f():\n    return 1\n");
    REQUIRE(stmts.size() == 2);
    CHECK(stmts[0].indent == 0);
    CHECK(stmts[1].indent == 4);
}

TEST_CASE("strings and comments hide their contents") {
    const auto stmts = split_statements("s = '''a\n(b'''  # ) [\nt = 1\n");
    REQUIRE(stmts.size() == 2);
    CHECK(stmts[1].line == 3);
}

TEST_CASE("magics are skipped and unterminated strings tolerated") {
    const auto stmts = split_statements("%matplotlib inline\n!pip install x\nx = 'oops\ny = 2\n");
    REQUIRE(stmts.size() == 2);
    CHECK(stmts[0].tokens.front().text == "x");
    CHECK(stmts[1].tokens.front().text == "y");
}

TEST_CASE("string literal values") {
    CHECK(string_literal_value("'a\\nb'") == "a\nb");
    CHECK(string_literal_value("r'a\\nb'") == "a\\nb");
    CHECK(string_literal_value("\"\"\"x\"\"\"") == "x");
    CHECK(is_fstring("f'{x}'"));
    CHECK(is_fstring("rf'{x}'"));
    CHECK_FALSE(is_fstring("b'x'"));
}

TEST_CASE("assertion statements") {
    auto first = [](const char* code) { return split_statements(code).front(); };
    CHECK(is_assertion(first("assert x == 1")));
    CHECK(is_assertion(first("np.testing.assert_allclose(a, b)")));
    CHECK(is_assertion(first("assertEqual(a, b)")));
    CHECK_FALSE(is_assertion(first("x = assert_thing(1)")));
    CHECK_FALSE(is_assertion(first("print('assert')")));
    CHECK_FALSE(is_assertion(first("self.assertion_count = 1")));
}

}  // TEST_SUITE
