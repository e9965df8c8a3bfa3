#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Best-effort lexical analysis of Python code cells. Never throws: unterminated
// strings, stray brackets and IPython magics are tolerated so that broken
// student cells still yield useful tokens.
namespace nbharness::lex {

enum class TokenKind { name, number, string, op };

struct Token {
    TokenKind kind;
    std::string_view text;  // view into the analysed source
    std::size_t offset;
    int line;  // 1-based physical line

    bool is(std::string_view op_text) const noexcept { return kind == TokenKind::op && text == op_text; }
};

// One simple statement: a logical line (brackets and backslash continuations
// folded) split further at top-level ';'.
struct Statement {
    std::vector<Token> tokens;
    std::size_t begin = 0;  // byte range in the source
    std::size_t end = 0;
    int line = 1;
    int indent = 0;  // column of the logical line's first token
    bool starts_logical_line = true;
};

std::vector<Statement> split_statements(std::string_view code);

bool is_keyword(std::string_view word) noexcept;

// Literal content of a string token with prefix and quotes removed; escapes
// are decoded unless the literal is raw.
std::string string_literal_value(std::string_view token_text);

bool is_fstring(std::string_view token_text) noexcept;

// A statement that starts with `assert`, or a call whose (dotted) callee's
// last identifier begins with "assert".
bool is_assertion(const Statement& stmt) noexcept;

}  // namespace nbharness::lex
