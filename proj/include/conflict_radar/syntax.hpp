#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conflict_radar {

// Byte range [startByte, endByte) with 1-based line/column positions.
// Columns count bytes; the end position is the one just past the last byte.
struct Span {
    std::size_t startByte = 0;
    std::size_t endByte = 0;
    int startLine = 1;
    int startCol = 1;
    int endLine = 1;
    int endCol = 1;

    bool empty() const { return startByte == endByte; }
    bool contains(const Span &inner) const
    {
        return startByte <= inner.startByte && inner.endByte <= endByte;
    }
    friend bool operator==(const Span &, const Span &) = default;
};

// Smallest span covering both arguments.
Span cover(const Span &first, const Span &last);

enum class TokenKind { Identifier, Keyword, Punctuation, Literal };

struct Token {
    std::string text;
    TokenKind kind = TokenKind::Punctuation;
    Span span;

    friend bool operator==(const Token &, const Token &) = default;
};

// Base of every lexing or parsing failure. A file that raises one of these is
// not in an error-free state.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string &what, Span span)
        : std::runtime_error(what), span_(span)
    {
    }

    const Span &span() const { return span_; }

private:
    Span span_;
};

class LexError : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

class ParseError : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

enum class Accessibility { Public, Protected, Private, PackagePrivate };

std::string_view to_string(Accessibility access);
std::optional<Accessibility> accessibility_from_string(std::string_view text);

struct ParamDecl {
    std::string type;
    Span typeSpan;
    std::string name;
    Span nameSpan;
    Span span;

    friend bool operator==(const ParamDecl &, const ParamDecl &) = default;
};

struct FieldDecl {
    Accessibility access = Accessibility::PackagePrivate;
    std::optional<Span> accessSpan;
    std::set<std::string> modifiers;
    std::optional<Span> modifierSpan;
    std::string type;
    Span typeSpan;
    std::string name;
    Span nameSpan;
    std::optional<std::string> initializer;
    std::optional<Span> initializerSpan;
    Span span;

    friend bool operator==(const FieldDecl &, const FieldDecl &) = default;
};

struct MethodDecl {
    Accessibility access = Accessibility::PackagePrivate;
    std::optional<Span> accessSpan;
    std::set<std::string> modifiers;
    std::optional<Span> modifierSpan;
    // Absent for constructors.
    std::optional<std::string> returnType;
    std::optional<Span> returnTypeSpan;
    std::string name;
    Span nameSpan;
    std::vector<ParamDecl> params;
    Span paramListSpan;
    std::uint64_t bodyFingerprint = 0;
    // Absent for bodiless (abstract, interface, native) methods.
    std::optional<Span> bodySpan;
    Span span;

    bool isConstructor() const { return !returnType.has_value(); }
    std::size_t arity() const { return params.size(); }
    friend bool operator==(const MethodDecl &, const MethodDecl &) = default;
};

struct ClassDecl {
    // "class", "interface" or "enum".
    std::string keyword = "class";
    std::string name;
    Span nameSpan;
    std::set<std::string> modifiers;
    std::optional<Span> modifierSpan;
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    std::vector<ClassDecl> classes;
    Span span;

    friend bool operator==(const ClassDecl &, const ClassDecl &) = default;
};

struct ElementTree {
    std::string filePath;
    std::vector<ClassDecl> classes;

    friend bool operator==(const ElementTree &, const ElementTree &) = default;
};

// Splits source into tokens, dropping whitespace and comments.
// Throws LexError on unterminated literals or comments and on stray bytes.
std::vector<Token> tokenize(std::string_view source);

// Parses a compilation unit. Throws LexError or ParseError.
ElementTree parse_unit(std::string_view source, std::string filePath);

// Token texts joined with layout-independent spacing: `Map<String, int[]>`,
// `a + b`, `f(x, y)`.
std::string token_text(std::span<const Token> tokens);

// FNV-1a 64 over the token texts, separated by a single 0x1F byte.
std::uint64_t body_fingerprint(std::span<const Token> bodyTokens);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t state = 0xcbf29ce484222325ULL);

// Copy of the tree with every span reset, for layout-insensitive comparison.
ElementTree strip_spans(ElementTree tree);

} // namespace conflict_radar
