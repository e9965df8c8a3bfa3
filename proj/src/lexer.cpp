#include "nbharness/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace nbharness::lex {

namespace {

bool is_name_start(unsigned char c) noexcept { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) noexcept { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) noexcept {
    if (word.empty() || word.size() > 2) {
        return false;
    }
    std::string lower;
    for (char c : word) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    static constexpr std::array<std::string_view, 8> kPrefixes{"r", "u", "f", "b", "br", "rb", "fr", "rf"};
    return std::find(kPrefixes.begin(), kPrefixes.end(), lower) != kPrefixes.end();
}

constexpr std::array<std::string_view, 22> kMultiOps{
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", ">=",
    "+=",  "-=",  "*=",  "/=",  "%=",  "&=", "|=", "^=", "@=", "**", "//"};

class Lexer {
public:
    explicit Lexer(std::string_view src) : s_(src) {}

    std::vector<Statement> run() {
        while (pos_ < s_.size()) {
            const unsigned char c = static_cast<unsigned char>(s_[pos_]);
            if (c == '\n') {
                newline();
                if (depth_ == 0) {
                    flush();
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                skip_to_eol();
                continue;
            }
            if (c == '\\' && continuation_follows()) {
                continue;
            }
            if (tokens_.empty() && depth_ == 0 && (c == '%' || c == '!' || c == '?')) {
                skip_to_eol();  // IPython magic or shell escape
                continue;
            }
            if (is_name_start(c)) {
                lex_name_or_prefixed_string();
                continue;
            }
            if (c == '\'' || c == '"') {
                lex_string(pos_);
                continue;
            }
            if (std::isdigit(c) || (c == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
                lex_number();
                continue;
            }
            lex_op();
        }
        flush();
        return std::move(out_);
    }

private:
    void newline() {
        ++pos_;
        ++line_;
        line_start_ = pos_;
    }

    void skip_to_eol() {
        while (pos_ < s_.size() && s_[pos_] != '\n') {
            ++pos_;
        }
    }

    bool continuation_follows() {
        std::size_t p = pos_ + 1;
        if (p < s_.size() && s_[p] == '\r') {
            ++p;
        }
        if (p < s_.size() && s_[p] == '\n') {
            pos_ = p;
            newline();
            return true;
        }
        if (p >= s_.size()) {
            pos_ = p;
            return true;
        }
        return false;
    }

    int column_of(std::size_t offset) const {
        int col = 0;
        for (std::size_t i = line_start_; i < offset; ++i) {
            col = s_[i] == '\t' ? (col / 8 + 1) * 8 : col + 1;
        }
        return col;
    }

    void push(TokenKind kind, std::size_t begin, int line) {
        if (tokens_.empty()) {
            indent_ = column_of(begin);
        }
        tokens_.push_back(Token{kind, s_.substr(begin, pos_ - begin), begin, line});
    }

    void lex_name_or_prefixed_string() {
        const std::size_t begin = pos_;
        while (pos_ < s_.size() && is_name_char(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"') && is_string_prefix(s_.substr(begin, pos_ - begin))) {
            lex_string(begin);
            return;
        }
        push(TokenKind::name, begin, line_);
    }

    // pos_ sits on the opening quote; begin includes any prefix.
    void lex_string(std::size_t begin) {
        const int start_line = line_;
        const bool at_line_start_col = tokens_.empty();
        const int indent = at_line_start_col ? column_of(begin) : indent_;
        const char q = s_[pos_];
        const bool triple = pos_ + 2 < s_.size() && s_[pos_ + 1] == q && s_[pos_ + 2] == q;
        pos_ += triple ? 3 : 1;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '\\') {
                if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') {
                    ++pos_;
                    newline();
                } else {
                    pos_ += 2;
                }
                continue;
            }
            if (c == '\n') {
                if (!triple) {
                    break;  // unterminated single-line literal
                }
                newline();
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < s_.size() && s_[pos_ + 1] == q && s_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        pos_ = std::min(pos_, s_.size());
        if (tokens_.empty()) {
            indent_ = indent;
        }
        tokens_.push_back(Token{TokenKind::string, s_.substr(begin, pos_ - begin), begin, start_line});
    }

    void lex_number() {
        const std::size_t begin = pos_;
        while (pos_ < s_.size()) {
            const unsigned char c = static_cast<unsigned char>(s_[pos_]);
            if (std::isalnum(c) || c == '.' || c == '_') {
                ++pos_;
            } else if ((c == '+' || c == '-') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E') &&
                       !(s_[begin] == '0' && begin + 1 < s_.size() && (s_[begin + 1] == 'x' || s_[begin + 1] == 'X'))) {
                ++pos_;
            } else {
                break;
            }
        }
        push(TokenKind::number, begin, line_);
    }

    void lex_op() {
        const std::size_t begin = pos_;
        for (auto op : kMultiOps) {
            if (s_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                push(TokenKind::op, begin, line_);
                return;
            }
        }
        // Two-char shifts are checked after the three-char forms above.
        if (s_.substr(pos_, 2) == "<<" || s_.substr(pos_, 2) == ">>") {
            pos_ += 2;
            push(TokenKind::op, begin, line_);
            return;
        }
        const char c = s_[pos_++];
        if (c == '(' || c == '[' || c == '{') {
            ++depth_;
        } else if ((c == ')' || c == ']' || c == '}') && depth_ > 0) {
            --depth_;
        }
        push(TokenKind::op, begin, line_);
    }

    void flush() {
        depth_ = 0;
        if (tokens_.empty()) {
            return;
        }
        bool first = true;
        std::size_t start = 0;
        int depth = 0;
        auto emit = [&](std::size_t from, std::size_t to) {
            if (from >= to) {
                return;
            }
            Statement st;
            st.tokens.assign(tokens_.begin() + static_cast<std::ptrdiff_t>(from),
                             tokens_.begin() + static_cast<std::ptrdiff_t>(to));
            st.begin = st.tokens.front().offset;
            st.end = st.tokens.back().offset + st.tokens.back().text.size();
            st.line = st.tokens.front().line;
            st.indent = indent_;
            st.starts_logical_line = first;
            first = false;
            out_.push_back(std::move(st));
        };
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            const auto& t = tokens_[i];
            if (t.kind != TokenKind::op) {
                continue;
            }
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                ++depth;
            } else if ((t.text == ")" || t.text == "]" || t.text == "}") && depth > 0) {
                --depth;
            } else if (t.text == ";" && depth == 0) {
                emit(start, i);
                start = i + 1;
            }
        }
        emit(start, tokens_.size());
        tokens_.clear();
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_ = 1;
    int depth_ = 0;
    int indent_ = 0;
    std::vector<Token> tokens_;
    std::vector<Statement> out_;
};

}  // namespace

std::vector<Statement> split_statements(std::string_view code) { return Lexer(code).run(); }

bool is_keyword(std::string_view word) noexcept {
    static constexpr std::array<std::string_view, 35> kKeywords{
        "False", "None",   "True",    "and",      "as",       "assert", "async", "await", "break",
        "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
        "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
        "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

namespace {

std::size_t quote_start(std::string_view text) noexcept {
    const auto q = text.find_first_of("'\"");
    return q == std::string_view::npos ? text.size() : q;
}

}  // namespace

bool is_fstring(std::string_view token_text) noexcept {
    const auto prefix = token_text.substr(0, quote_start(token_text));
    return prefix.find_first_of("fF") != std::string_view::npos;
}

std::string string_literal_value(std::string_view text) {
    const std::size_t q = quote_start(text);
    if (q >= text.size()) {
        return {};
    }
    const auto prefix = text.substr(0, q);
    const bool raw = prefix.find_first_of("rR") != std::string_view::npos;
    const char quote = text[q];
    const bool triple = q + 2 < text.size() && text[q + 1] == quote && text[q + 2] == quote;
    const std::size_t qlen = triple ? 3 : 1;
    std::string_view body = text.substr(q + qlen);
    if (body.size() >= qlen && body.substr(body.size() - qlen) == std::string(qlen, quote)) {
        body.remove_suffix(qlen);
    }
    if (raw) {
        return std::string(body);
    }
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '\\' || i + 1 >= body.size()) {
            out.push_back(body[i]);
            continue;
        }
        const char e = body[++i];
        switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '0': out.push_back('\0'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        case '\n': break;
        default:
            out.push_back('\\');
            out.push_back(e);
        }
    }
    return out;
}

bool is_assertion(const Statement& stmt) noexcept {
    const auto& t = stmt.tokens;
    if (t.empty() || t[0].kind != TokenKind::name) {
        return false;
    }
    if (t[0].text == "assert") {
        return true;
    }
    // NAME ( . NAME )* '('
    std::size_t i = 0;
    std::string_view last = t[0].text;
    while (i + 2 < t.size() && t[i + 1].is(".") && t[i + 2].kind == TokenKind::name) {
        i += 2;
        last = t[i].text;
    }
    if (i + 1 >= t.size() || !t[i + 1].is("(")) {
        return false;
    }
    return last.starts_with("assert");
}

}  // namespace nbharness::lex
