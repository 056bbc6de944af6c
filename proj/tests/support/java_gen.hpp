#pragma once

// Random Java-subset compilation units for property tests. Units are built as
// plain structs, rendered to source (optionally with layout noise), and
// mutated one attribute at a time.

#include "conflict_radar/model.hpp"
#include "conflict_radar/syntax.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace conflict_radar::testing {

struct GenParam {
    std::string type;
    std::string name;
};

struct GenField {
    std::string access; // "" for package-private
    std::set<std::string> mods;
    std::string type;
    std::string name;
    std::optional<std::string> init;
};

struct GenMethod {
    std::string access;
    std::set<std::string> mods;
    std::optional<std::string> ret; // nullopt: constructor
    std::string name;
    std::vector<GenParam> params;
    std::optional<std::vector<std::string>> body; // nullopt: ';'
};

struct GenClass {
    std::string access;
    std::set<std::string> mods;
    std::string name;
    std::vector<GenField> fields;
    std::vector<GenMethod> methods;
    std::vector<GenClass> nested;
};

struct GenUnit {
    std::vector<GenClass> classes;
};

class JavaGen {
public:
    explicit JavaGen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64 &rng() { return rng_; }

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    template <typename T>
    const T &pick(const std::vector<T> &v)
    {
        return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
    }

    std::string fresh(const std::string &prefix) { return prefix + std::to_string(counter_++); }

    std::string type()
    {
        static const std::vector<std::string> types = {
            "int", "long", "boolean", "String", "double", "List<String>",
            "Map<String, Integer>", "int[]", "Zoo.Animal", "Optional<List<Long>>",
        };
        return pick(types);
    }

    std::string other_type(const std::string &not_this)
    {
        for (;;) {
            std::string t = type();
            if (t != not_this) {
                return t;
            }
        }
    }

    std::string access()
    {
        static const std::vector<std::string> access = {"", "public", "protected", "private"};
        return pick(access);
    }

    std::string other_access(const std::string &not_this)
    {
        for (;;) {
            std::string a = access();
            if (a != not_this) {
                return a;
            }
        }
    }

    std::string literal()
    {
        static const std::vector<std::string> lits = {
            "0", "1", "42", "\"zebra\"", "null", "true", "new ArrayList<>()", "x + 1",
            "compute(3, 4)", "new int[] {1, 2}",
        };
        return pick(lits);
    }

    std::string statement()
    {
        static const std::vector<std::string> stmts = {
            "int a = 1;", "count++;", "log(\"hi\");", "return;",
            "if (x > 0) { x--; }", "for (int i = 0; i < n; i++) { sum += i; }",
            "String s = \"{ not a brace }\";", "char c = '}';", "list.add(new Item());",
            "while (it.hasNext()) { it.next(); }",
        };
        return pick(stmts);
    }

    GenField field()
    {
        GenField f;
        f.access = access();
        if (coin(0.3)) {
            f.mods.insert("static");
        }
        if (coin(0.3)) {
            f.mods.insert("final");
        }
        f.type = type();
        f.name = fresh("f");
        if (coin(0.6)) {
            f.init = literal();
        }
        return f;
    }

    GenMethod method(const std::string &className)
    {
        GenMethod m;
        m.access = access();
        if (coin(0.2)) {
            m.mods.insert("static");
        }
        if (coin(0.15)) {
            m.mods.insert("synchronized");
        }
        const bool ctor = coin(0.15);
        if (ctor) {
            m.name = className;
        } else {
            m.ret = coin(0.3) ? std::string("void") : type();
            m.name = fresh("m");
        }
        const int nParams = uniform(0, 3);
        for (int i = 0; i < nParams; ++i) {
            m.params.push_back({type(), fresh("p")});
        }
        if (ctor || coin(0.85)) {
            std::vector<std::string> body;
            const int n = uniform(0, 3);
            for (int i = 0; i < n; ++i) {
                body.push_back(statement());
            }
            m.body = body;
        }
        return m;
    }

    GenClass klass(int depth)
    {
        GenClass c;
        c.access = depth == 0 ? std::string(coin() ? "public" : "") : access();
        if (depth > 0 && coin(0.4)) {
            c.mods.insert("static");
        }
        if (coin(0.2)) {
            c.mods.insert("final");
        }
        c.name = fresh("C");
        const int nFields = uniform(0, 4);
        for (int i = 0; i < nFields; ++i) {
            c.fields.push_back(field());
        }
        const int nMethods = uniform(0, 4);
        for (int i = 0; i < nMethods; ++i) {
            GenMethod m = method(c.name);
            if (!has_method_key(c, m.name, m.params.size())) {
                c.methods.push_back(std::move(m));
            }
        }
        // An occasional overload exercises the (name, arity) key.
        if (!c.methods.empty() && coin(0.2)) {
            GenMethod over = c.methods.front();
            over.params.push_back({type(), fresh("p")});
            if (!has_method_key(c, over.name, over.params.size())) {
                c.methods.push_back(std::move(over));
            }
        }
        if (depth < 2 && coin(0.3)) {
            c.nested.push_back(klass(depth + 1));
        }
        return c;
    }

    GenUnit unit()
    {
        GenUnit u;
        const int n = uniform(1, 2);
        for (int i = 0; i < n; ++i) {
            u.classes.push_back(klass(0));
        }
        return u;
    }

    static bool has_method_key(const GenClass &c, const std::string &name, std::size_t arity)
    {
        return std::any_of(c.methods.begin(), c.methods.end(), [&](const GenMethod &m) {
            return m.name == name && m.params.size() == arity;
        });
    }

    // -- rendering --------------------------------------------------------

    std::string render(const GenUnit &u, bool noisy = false)
    {
        noisy_ = noisy;
        std::string out = "package zoo.app;\n" + gap() + "import java.util.*;\n";
        for (const GenClass &c : u.classes) {
            render_class(out, c, 0);
        }
        return out;
    }

private:
    std::string gap()
    {
        if (!noisy_) {
            return " ";
        }
        static const std::vector<std::string> gaps = {" ", "  ", "\n", "\t", " /* c */ ",
                                                      " // note\n", "\n\n  "};
        return pick(gaps);
    }

    static std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 4, ' '); }

    static std::string mods(const std::string &access, const std::set<std::string> &others)
    {
        std::string out = access.empty() ? "" : access + " ";
        for (const std::string &m : others) {
            out += m + " ";
        }
        return out;
    }

    void render_class(std::string &out, const GenClass &c, int depth)
    {
        out += indent(depth);
        if (noisy_ && coin(0.2)) {
            out += "@SuppressWarnings(\"x\")" + gap();
        }
        out += mods(c.access, c.mods) + "class" + gap() + c.name + gap() + "{\n";
        for (const GenField &f : c.fields) {
            out += indent(depth + 1) + mods(f.access, f.mods) + f.type + gap() + f.name;
            if (f.init) {
                out += gap() + "=" + gap() + *f.init;
            }
            out += ";\n";
        }
        for (const GenMethod &m : c.methods) {
            out += indent(depth + 1) + mods(m.access, m.mods);
            if (m.ret) {
                out += *m.ret + gap();
            }
            out += m.name + "(";
            for (std::size_t i = 0; i < m.params.size(); ++i) {
                out += (i ? "," + gap() : std::string()) + m.params[i].type + " " + m.params[i].name;
            }
            out += ")";
            if (m.body) {
                out += gap() + "{";
                for (const std::string &s : *m.body) {
                    out += gap() + s;
                }
                out += gap() + "}\n";
            } else {
                out += ";\n";
            }
        }
        for (const GenClass &n : c.nested) {
            render_class(out, n, depth + 1);
        }
        out += indent(depth) + "}\n";
    }

    std::mt19937_64 rng_;
    int counter_ = 0;
    bool noisy_ = false;
};

// Token-normalized form of a type or expression, as the parser records it.
inline std::string normalized(const std::string &text)
{
    return token_text(tokenize(text));
}

} // namespace conflict_radar::testing
