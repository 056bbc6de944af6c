#include "conflict_radar/syntax.hpp"

#include "source_index.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace conflict_radar {

namespace {

constexpr std::array kKeywords = {
    "abstract",  "assert",     "boolean",  "break",     "byte",
    "case",      "catch",      "char",     "class",     "const",
    "continue",  "default",    "do",       "double",    "else",
    "enum",      "extends",    "final",    "finally",   "float",
    "for",       "goto",       "if",       "implements", "import",
    "instanceof", "int",       "interface", "long",     "native",
    "new",       "package",    "private",  "protected", "public",
    "return",    "short",      "static",   "strictfp",  "super",
    "switch",    "synchronized", "this",   "throw",     "throws",
    "transient", "try",        "void",     "volatile",  "while",
};

constexpr std::array kLiteralWords = {"true", "false", "null"};

// Longest first. '>' is always its own token: "List<List<T>>" closes twice.
constexpr std::array kOperators = {
    "<<=", "...", "::", "->", "<<", "<=", "==", "!=", "&&", "||", "++",
    "--",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=",
};

constexpr std::string_view kSingles = "(){}[];,.@=><!~?:+-*/&|^%";

bool is_ident_start(unsigned char c)
{
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c)
{
    return is_ident_start(c) || std::isdigit(c);
}

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source), index_(source) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (skip_trivia(), pos_ < src_.size()) {
            out.push_back(next());
        }
        return out;
    }

private:
    void skip_trivia()
    {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
                ++pos_;
            } else if (src_.substr(pos_, 2) == "//") {
                const auto eol = src_.find('\n', pos_);
                pos_ = eol == std::string_view::npos ? src_.size() : eol + 1;
            } else if (src_.substr(pos_, 2) == "/*") {
                const auto close = src_.find("*/", pos_ + 2);
                if (close == std::string_view::npos) {
                    throw LexError("unterminated block comment",
                                   index_.span(pos_, src_.size()));
                }
                pos_ = close + 2;
            } else {
                return;
            }
        }
    }

    Token next()
    {
        const std::size_t start = pos_;
        const auto c = static_cast<unsigned char>(src_[pos_]);

        if (is_ident_start(c)) {
            while (pos_ < src_.size() &&
                   is_ident_part(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            }
            const std::string_view word = src_.substr(start, pos_ - start);
            TokenKind kind = TokenKind::Identifier;
            if (std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end()) {
                kind = TokenKind::Keyword;
            } else if (std::find(kLiteralWords.begin(), kLiteralWords.end(), word) !=
                       kLiteralWords.end()) {
                kind = TokenKind::Literal;
            }
            return make(start, kind);
        }
        if (std::isdigit(c) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return make(start, TokenKind::Literal);
        }
        if (src_.substr(pos_, 3) == "\"\"\"") {
            const auto close = src_.find("\"\"\"", pos_ + 3);
            if (close == std::string_view::npos) {
                throw LexError("unterminated text block", index_.span(start, src_.size()));
            }
            pos_ = close + 3;
            return make(start, TokenKind::Literal);
        }
        if (c == '"' || c == '\'') {
            lex_quoted(static_cast<char>(c));
            return make(start, TokenKind::Literal);
        }
        for (std::string_view op : kOperators) {
            if (src_.substr(pos_, op.size()) == op) {
                pos_ += op.size();
                return make(start, TokenKind::Punctuation);
            }
        }
        if (kSingles.find(static_cast<char>(c)) != std::string_view::npos) {
            ++pos_;
            return make(start, TokenKind::Punctuation);
        }
        throw LexError("unexpected character '" + std::string(1, static_cast<char>(c)) + "'",
                       index_.span(start, start + 1));
    }

    void lex_number()
    {
        while (pos_ < src_.size()) {
            const auto ch = static_cast<unsigned char>(src_[pos_]);
            if (std::isalnum(ch) || ch == '_' || ch == '.') {
                ++pos_;
            } else if ((ch == '+' || ch == '-') && pos_ > 0 &&
                       std::string_view("eEpP").find(src_[pos_ - 1]) != std::string_view::npos &&
                       !is_hex_literal_without_exponent()) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    // "0x1e+2" is hex 0x1e plus 2, while "0x1p+2" is a hex float exponent.
    bool is_hex_literal_without_exponent() const
    {
        std::size_t begin = pos_;
        while (begin > 0 && (std::isalnum(static_cast<unsigned char>(src_[begin - 1])) ||
                             src_[begin - 1] == '_' || src_[begin - 1] == '.')) {
            --begin;
        }
        const std::string_view lit = src_.substr(begin, pos_ - begin);
        const bool hex = lit.size() > 1 && lit[0] == '0' && (lit[1] == 'x' || lit[1] == 'X');
        return hex && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E');
    }

    void lex_quoted(char quote)
    {
        const std::size_t start = pos_++;
        while (pos_ < src_.size()) {
            const char ch = src_[pos_];
            if (ch == '\\') {
                pos_ += 2;
            } else if (ch == '\n') {
                break;
            } else if (ch == quote) {
                ++pos_;
                return;
            } else {
                ++pos_;
            }
        }
        throw LexError(quote == '"' ? "unterminated string literal"
                                    : "unterminated character literal",
                       index_.span(start, std::min(pos_, src_.size())));
    }

    Token make(std::size_t start, TokenKind kind) const
    {
        return Token{std::string(src_.substr(start, pos_ - start)), kind,
                     index_.span(start, pos_)};
    }

    std::string_view src_;
    detail::SourceIndex index_;
    std::size_t pos_ = 0;
};

} // namespace

Span cover(const Span &first, const Span &last)
{
    Span s = first;
    s.endByte = last.endByte;
    s.endLine = last.endLine;
    s.endCol = last.endCol;
    return s;
}

std::vector<Token> tokenize(std::string_view source)
{
    return Lexer(source).run();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state)
{
    for (const char ch : bytes) {
        state ^= static_cast<unsigned char>(ch);
        state *= 0x100000001b3ULL;
    }
    return state;
}

namespace {

bool wordy(const Token &t)
{
    return t.kind != TokenKind::Punctuation;
}

bool space_between(const Token &a, const Token &b)
{
    static const std::set<std::string_view> tightAfter{"(", "[", ".", "@", "::", "<", "!", "~"};
    static const std::set<std::string_view> tightBefore{",", ";", ")", "]", ".", "...", "::", "<", ">"};
    if (tightAfter.count(a.text) != 0 || tightBefore.count(b.text) != 0) {
        return false;
    }
    if (b.text == "(" || b.text == "[") {
        return !(wordy(a) || a.text == ")" || a.text == "]" || a.text == ">");
    }
    if (a.text == ">") {
        return wordy(b) || b.text == "{";
    }
    return true;
}

} // namespace

std::string token_text(std::span<const Token> tokens)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0 && space_between(tokens[i - 1], tokens[i])) {
            out += ' ';
        }
        out += tokens[i].text;
    }
    return out;
}

std::uint64_t body_fingerprint(std::span<const Token> bodyTokens)
{
    std::uint64_t h = fnv1a64({});
    bool first = true;
    for (const Token &tok : bodyTokens) {
        if (!first) {
            h = fnv1a64("\x1f", h);
        }
        h = fnv1a64(tok.text, h);
        first = false;
    }
    return h;
}

} // namespace conflict_radar
