#include "conflict_radar/syntax.hpp"

#include "source_index.hpp"

#include <map>
#include <tuple>

namespace conflict_radar {

namespace {

const std::set<std::string, std::less<>> kMemberModifiers = {
    "abstract", "default", "final", "native", "sealed", "static",
    "strictfp", "synchronized", "transient", "volatile",
};

const std::set<std::string, std::less<>> kPrimitiveTypes = {
    "boolean", "byte", "char", "double", "float", "int", "long", "short", "void",
};

struct Modifiers {
    Accessibility access = Accessibility::PackagePrivate;
    std::optional<Span> accessSpan;
    std::set<std::string> others;
    std::optional<Span> span;
};

std::string join_tokens(const std::vector<Token> &tokens, std::size_t begin, std::size_t end)
{
    return token_text(std::span<const Token>(tokens).subspan(begin, end - begin));
}

class Parser {
public:
    Parser(std::string_view source, std::string filePath)
        : index_(source), toks_(tokenize(source)), filePath_(std::move(filePath))
    {
    }

    ElementTree run()
    {
        ElementTree tree;
        tree.filePath = filePath_;
        skip_annotations();
        if (accept("package")) {
            skip_until_semicolon();
        }
        while (peek_is("import")) {
            advance();
            skip_until_semicolon();
        }
        std::set<std::string> seen;
        while (!at_end()) {
            if (accept(";")) {
                continue;
            }
            ClassDecl cls = type_decl();
            if (!seen.insert(cls.name).second) {
                throw ParseError("duplicate class '" + cls.name + "'", cls.nameSpan);
            }
            tree.classes.push_back(std::move(cls));
        }
        return tree;
    }

private:
    // -- token cursor ---------------------------------------------------

    bool at_end() const { return pos_ >= toks_.size(); }

    const Token *peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
    }

    bool peek_is(std::string_view text, std::size_t ahead = 0) const
    {
        const Token *t = peek(ahead);
        return t != nullptr && t->text == text;
    }

    bool peek_ident(std::size_t ahead = 0) const
    {
        const Token *t = peek(ahead);
        return t != nullptr && t->kind == TokenKind::Identifier;
    }

    const Token &advance() { return toks_[pos_++]; }

    bool accept(std::string_view text)
    {
        if (peek_is(text)) {
            ++pos_;
            return true;
        }
        return false;
    }

    Span here() const { return at_end() ? index_.eof() : toks_[pos_].span; }

    [[noreturn]] void fail(const std::string &expected) const
    {
        const std::string found = at_end() ? "end of file" : "'" + toks_[pos_].text + "'";
        throw ParseError("expected " + expected + " but found " + found, here());
    }

    const Token &expect(std::string_view text)
    {
        if (!peek_is(text)) {
            fail("'" + std::string(text) + "'");
        }
        return advance();
    }

    const Token &expect_ident()
    {
        if (!peek_ident()) {
            fail("identifier");
        }
        return advance();
    }

    // Skips one balanced group starting at the current opener and returns the
    // index one past its closer.
    std::size_t skip_balanced(std::string_view open, std::string_view close)
    {
        expect(open);
        int depth = 1;
        while (depth > 0) {
            if (at_end()) {
                fail("'" + std::string(close) + "'");
            }
            const Token &t = advance();
            if (t.text == open) {
                ++depth;
            } else if (t.text == close) {
                --depth;
            } else if (open == "<" && (t.text == ";" || t.text == "{" || t.text == "}" ||
                                       t.text == "(" || t.text == ")")) {
                --pos_;
                fail("'>'");
            }
        }
        return pos_;
    }

    void skip_until_semicolon()
    {
        while (!at_end() && !peek_is(";")) {
            advance();
        }
        expect(";");
    }

    void skip_annotations()
    {
        while (peek_is("@") && !peek_is("interface", 1)) {
            advance();
            expect_ident();
            while (peek_is(".") && peek_ident(1)) {
                pos_ += 2;
            }
            if (peek_is("(")) {
                skip_balanced("(", ")");
            }
        }
    }

    // -- declarations ---------------------------------------------------

    Modifiers modifiers()
    {
        Modifiers mods;
        std::optional<Span> first;
        Span last;
        auto note = [&](const Span &s) {
            if (!first) {
                first = s;
            }
            last = s;
        };
        for (;;) {
            if (peek_is("@") && !peek_is("interface", 1)) {
                skip_annotations();
                continue;
            }
            const Token *t = peek();
            if (t == nullptr) {
                break;
            }
            if (const auto access = accessibility_from_string(t->text);
                access && *access != Accessibility::PackagePrivate) {
                if (mods.accessSpan) {
                    throw ParseError("repeated access modifier", t->span);
                }
                mods.access = *access;
                mods.accessSpan = t->span;
                note(t->span);
                advance();
            } else if (kMemberModifiers.contains(t->text) &&
                       !(t->text == "default" && peek_is(":", 1))) {
                mods.others.insert(t->text);
                note(t->span);
                advance();
            } else {
                break;
            }
        }
        if (first) {
            mods.span = cover(*first, last);
        }
        return mods;
    }

    ClassDecl type_decl()
    {
        const Span start = here();
        Modifiers mods = modifiers();
        return type_decl_after_modifiers(start, mods);
    }

    ClassDecl type_decl_after_modifiers(const Span &start, const Modifiers &mods)
    {
        ClassDecl cls;
        if (peek_is("@") && peek_is("interface", 1)) {
            throw ParseError("annotation type declarations are not supported", here());
        }
        if (!(peek_is("class") || peek_is("interface") || peek_is("enum"))) {
            fail("'class', 'interface' or 'enum'");
        }
        cls.keyword = advance().text;
        cls.modifiers = mods.others;
        if (mods.accessSpan) {
            cls.modifiers.insert(std::string(to_string(mods.access)));
        }
        cls.modifierSpan = mods.span;
        const Token &name = expect_ident();
        cls.name = name.text;
        cls.nameSpan = name.span;
        if (peek_is("<")) {
            skip_balanced("<", ">");
        }
        // extends / implements / permits clauses are consumed, not modeled
        while (!at_end() && !peek_is("{")) {
            if (peek_is(";") || peek_is("}")) {
                fail("'{'");
            }
            advance();
        }
        expect("{");
        if (cls.keyword == "enum") {
            enum_constants();
        }
        class_body(cls);
        const Token &close = expect("}");
        cls.span = cover(start, close.span);
        return cls;
    }

    void enum_constants()
    {
        int depth = 0;
        while (!at_end()) {
            if (depth == 0 && peek_is("}")) {
                return;
            }
            const Token &t = advance();
            if (t.text == "(" || t.text == "{") {
                ++depth;
            } else if (t.text == ")" || t.text == "}") {
                --depth;
            } else if (depth == 0 && t.text == ";") {
                return;
            }
        }
        fail("'}'");
    }

    void class_body(ClassDecl &cls)
    {
        std::set<std::tuple<int, std::string, std::size_t>> keys;
        auto claim = [&](int kind, const std::string &name, std::size_t arity, const Span &at) {
            if (!keys.emplace(kind, name, arity).second) {
                throw ParseError("duplicate member '" + name + "'", at);
            }
        };

        while (!at_end() && !peek_is("}")) {
            if (accept(";")) {
                continue;
            }
            if (peek_is("{")) {
                skip_balanced("{", "}");
                continue;
            }
            if (peek_is("static") && peek_is("{", 1)) {
                advance();
                skip_balanced("{", "}");
                continue;
            }
            const Span start = here();
            Modifiers mods = modifiers();
            if (peek_is("class") || peek_is("interface") || peek_is("enum") ||
                (peek_is("@") && peek_is("interface", 1))) {
                ClassDecl nested = type_decl_after_modifiers(start, mods);
                claim(2, nested.name, 0, nested.nameSpan);
                cls.classes.push_back(std::move(nested));
                continue;
            }
            if (peek_is("<")) {
                skip_balanced("<", ">");
            }
            if (peek_ident() && peek(0)->text == cls.name && peek_is("(", 1)) {
                MethodDecl ctor = method_rest(start, mods, std::nullopt);
                claim(1, ctor.name, ctor.arity(), ctor.nameSpan);
                cls.methods.push_back(std::move(ctor));
                continue;
            }
            const auto [type, typeSpan] = type_ref();
            if (peek_ident() && peek_is("(", 1)) {
                MethodDecl m = method_rest(start, mods, std::make_pair(type, typeSpan));
                claim(1, m.name, m.arity(), m.nameSpan);
                cls.methods.push_back(std::move(m));
                continue;
            }
            for (FieldDecl &f : field_rest(start, mods, type, typeSpan)) {
                claim(0, f.name, 0, f.nameSpan);
                cls.fields.push_back(std::move(f));
            }
        }
    }

    // Reads a type reference and returns its normalized text and span.
    std::pair<std::string, Span> type_ref()
    {
        skip_annotations();
        const std::size_t begin = pos_;
        if (peek() != nullptr && kPrimitiveTypes.contains(peek()->text)) {
            advance();
        } else {
            expect_ident();
            if (peek_is("<")) {
                skip_balanced("<", ">");
            }
            while (peek_is(".") && peek_ident(1)) {
                pos_ += 2;
                if (peek_is("<")) {
                    skip_balanced("<", ">");
                }
            }
        }
        while (peek_is("[") && peek_is("]", 1)) {
            pos_ += 2;
        }
        return {join_tokens(toks_, begin, pos_), cover(toks_[begin].span, toks_[pos_ - 1].span)};
    }

    MethodDecl method_rest(const Span &start, const Modifiers &mods,
                           std::optional<std::pair<std::string, Span>> returnType)
    {
        MethodDecl m;
        m.access = mods.access;
        m.accessSpan = mods.accessSpan;
        m.modifiers = mods.others;
        m.modifierSpan = mods.span;
        if (returnType) {
            m.returnType = returnType->first;
            m.returnTypeSpan = returnType->second;
        }
        const Token &name = expect_ident();
        m.name = name.text;
        m.nameSpan = name.span;
        const Token &open = expect("(");
        if (!peek_is(")")) {
            do {
                m.params.push_back(param());
            } while (accept(","));
        }
        const Token &close = expect(")");
        m.paramListSpan = cover(open.span, close.span);

        std::set<std::string> paramNames;
        for (const ParamDecl &p : m.params) {
            if (!paramNames.insert(p.name).second) {
                throw ParseError("duplicate parameter '" + p.name + "'", p.nameSpan);
            }
        }

        while (peek_is("[") && peek_is("]", 1)) {
            pos_ += 2;
            if (m.returnType) {
                *m.returnType += "[]";
            }
        }
        if (accept("throws")) {
            while (!at_end() && !peek_is("{") && !peek_is(";")) {
                advance();
            }
        }
        if (peek_is("{")) {
            const std::size_t begin = pos_;
            const std::size_t end = skip_balanced("{", "}");
            m.bodyFingerprint = body_fingerprint(
                std::span<const Token>(toks_.data() + begin, end - begin));
            m.bodySpan = cover(toks_[begin].span, toks_[end - 1].span);
            m.span = cover(start, toks_[end - 1].span);
        } else {
            const Token &semi = expect(";");
            m.bodyFingerprint = body_fingerprint({});
            m.span = cover(start, semi.span);
        }
        return m;
    }

    ParamDecl param()
    {
        const Span start = here();
        while (accept("final") || (peek_is("@") && (skip_annotations(), true))) {
        }
        ParamDecl p;
        auto [type, typeSpan] = type_ref();
        if (peek_is("...")) {
            typeSpan = cover(typeSpan, advance().span);
            type += "...";
        }
        const Token &name = expect_ident();
        p.name = name.text;
        p.nameSpan = name.span;
        Span end = name.span;
        while (peek_is("[") && peek_is("]", 1)) {
            type += "[]";
            advance();
            end = advance().span;
        }
        p.type = std::move(type);
        p.typeSpan = typeSpan;
        p.span = cover(start, end);
        return p;
    }

    std::vector<FieldDecl> field_rest(const Span &start, const Modifiers &mods,
                                      const std::string &type, const Span &typeSpan)
    {
        std::vector<FieldDecl> out;
        for (;;) {
            FieldDecl f;
            f.access = mods.access;
            f.accessSpan = mods.accessSpan;
            f.modifiers = mods.others;
            f.modifierSpan = mods.span;
            f.type = type;
            f.typeSpan = typeSpan;
            const Token &name = expect_ident();
            f.name = name.text;
            f.nameSpan = name.span;
            while (peek_is("[") && peek_is("]", 1)) {
                pos_ += 2;
                f.type += "[]";
            }
            if (accept("=")) {
                const std::size_t begin = pos_;
                initializer_end();
                if (pos_ == begin) {
                    fail("initializer expression");
                }
                f.initializer = join_tokens(toks_, begin, pos_);
                f.initializerSpan = cover(toks_[begin].span, toks_[pos_ - 1].span);
            }
            out.push_back(std::move(f));
            if (accept(",")) {
                continue;
            }
            const Token &semi = expect(";");
            for (FieldDecl &decl : out) {
                decl.span = cover(start, semi.span);
            }
            return out;
        }
    }

    // Advances to the ',' or ';' that ends the current variable initializer.
    void initializer_end()
    {
        int depth = 0;
        int angle = 0;
        while (!at_end()) {
            const Token &t = *peek();
            if (depth == 0 && (t.text == ";" || (t.text == "," && angle == 0))) {
                return;
            }
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                ++depth;
            } else if (t.text == ")" || t.text == "]" || t.text == "}") {
                if (--depth < 0) {
                    fail("';'");
                }
            } else if (t.text == "<" && pos_ > 0 &&
                       toks_[pos_ - 1].kind == TokenKind::Identifier && peek(1) != nullptr &&
                       (peek(1)->kind == TokenKind::Identifier || peek(1)->text == "?" ||
                        peek(1)->text == ">")) {
                ++angle;
            } else if (t.text == ">" && angle > 0) {
                --angle;
            }
            advance();
        }
        fail("';'");
    }

    detail::SourceIndex index_;
    std::vector<Token> toks_;
    std::string filePath_;
    std::size_t pos_ = 0;
};

void clear_spans(ClassDecl &cls)
{
    cls.nameSpan = {};
    cls.modifierSpan.reset();
    cls.span = {};
    for (FieldDecl &f : cls.fields) {
        f.accessSpan.reset();
        f.modifierSpan.reset();
        f.typeSpan = {};
        f.nameSpan = {};
        f.initializerSpan.reset();
        f.span = {};
    }
    for (MethodDecl &m : cls.methods) {
        m.accessSpan.reset();
        m.modifierSpan.reset();
        m.returnTypeSpan.reset();
        m.nameSpan = {};
        m.paramListSpan = {};
        if (m.bodySpan) {
            m.bodySpan = Span{};
        }
        m.span = {};
        for (ParamDecl &p : m.params) {
            p = ParamDecl{p.type, {}, p.name, {}, {}};
        }
    }
    for (ClassDecl &nested : cls.classes) {
        clear_spans(nested);
    }
}

} // namespace

std::string_view to_string(Accessibility access)
{
    switch (access) {
    case Accessibility::Public:
        return "public";
    case Accessibility::Protected:
        return "protected";
    case Accessibility::Private:
        return "private";
    case Accessibility::PackagePrivate:
        break;
    }
    return "package-private";
}

std::optional<Accessibility> accessibility_from_string(std::string_view text)
{
    if (text == "public") {
        return Accessibility::Public;
    }
    if (text == "protected") {
        return Accessibility::Protected;
    }
    if (text == "private") {
        return Accessibility::Private;
    }
    if (text == "package-private") {
        return Accessibility::PackagePrivate;
    }
    return std::nullopt;
}

ElementTree parse_unit(std::string_view source, std::string filePath)
{
    return Parser(source, std::move(filePath)).run();
}

ElementTree strip_spans(ElementTree tree)
{
    for (ClassDecl &cls : tree.classes) {
        clear_spans(cls);
    }
    return tree;
}

} // namespace conflict_radar
