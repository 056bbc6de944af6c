#pragma once

// Single-attribute mutations over generated units, each paired with the
// change it must produce.

#include "support/java_gen.hpp"

#include "conflict_radar/model.hpp"

#include <functional>
#include <optional>

namespace conflict_radar::testing {

struct Mutation {
    ChangeKind kind;
    std::optional<std::string> oldValue;
    std::optional<std::string> newValue;
};

namespace detail {

inline void collect(GenClass &c, std::vector<GenClass *> &out)
{
    out.push_back(&c);
    for (GenClass &n : c.nested) {
        collect(n, out);
    }
}

inline std::string access_name(const std::string &access)
{
    return access.empty() ? "package-private" : access;
}

inline std::string join(const std::set<std::string> &mods)
{
    std::string out;
    for (const std::string &m : mods) {
        out += (out.empty() ? "" : " ") + m;
    }
    return out;
}

inline std::string field_signature(const GenField &f)
{
    return normalized(f.type) + " " + f.name;
}

inline std::string method_signature(const GenMethod &m)
{
    std::string out = m.ret ? normalized(*m.ret) + " " : "";
    out += m.name + "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        out += (i ? ", " : "") + normalized(m.params[i].type);
    }
    return out + ")";
}

} // namespace detail

// Applies one mutation of `kind` to a random eligible element. Returns
// nullopt when the unit has no eligible element.
inline std::optional<Mutation> mutate(GenUnit &unit, ChangeKind kind, JavaGen &gen)
{
    std::vector<GenClass *> classes;
    for (GenClass &c : unit.classes) {
        detail::collect(c, classes);
    }
    struct MethodSite {
        GenClass *cls;
        GenMethod *method;
    };
    struct FieldSite {
        GenClass *cls;
        std::size_t index;
    };
    std::vector<MethodSite> methods;
    std::vector<FieldSite> fields;
    for (GenClass *c : classes) {
        for (GenMethod &m : c->methods) {
            methods.push_back({c, &m});
        }
        for (std::size_t i = 0; i < c->fields.size(); ++i) {
            fields.push_back({c, i});
        }
    }
    auto pick_method = [&](auto &&eligible) -> std::optional<MethodSite> {
        std::vector<MethodSite> ok;
        for (const MethodSite &s : methods) {
            if (eligible(*s.cls, *s.method)) {
                ok.push_back(s);
            }
        }
        if (ok.empty()) {
            return std::nullopt;
        }
        return gen.pick(ok);
    };
    auto pick_field = [&]() -> GenField * {
        if (fields.empty()) {
            return nullptr;
        }
        const FieldSite s = gen.pick(fields);
        return &s.cls->fields[s.index];
    };
    auto any = [](const GenClass &, const GenMethod &) { return true; };

    switch (kind) {
    case ChangeKind::MethodBodyChanged: {
        auto s = pick_method([](const GenClass &, const GenMethod &m) { return m.body.has_value(); });
        if (!s) {
            return std::nullopt;
        }
        s->method->body->push_back("int " + gen.fresh("z") + " = 0;");
        return Mutation{kind, std::nullopt, std::nullopt};
    }
    case ChangeKind::MethodRenamed: {
        auto s = pick_method([](const GenClass &, const GenMethod &m) { return m.ret.has_value(); });
        if (!s) {
            return std::nullopt;
        }
        Mutation mu{kind, s->method->name, gen.fresh("m")};
        s->method->name = *mu.newValue;
        return mu;
    }
    case ChangeKind::MethodReturnTypeChanged: {
        auto s = pick_method([](const GenClass &, const GenMethod &m) { return m.ret.has_value(); });
        if (!s) {
            return std::nullopt;
        }
        const std::string next = gen.coin(0.2) && *s->method->ret != "void"
                                     ? std::string("void")
                                     : gen.other_type(*s->method->ret);
        Mutation mu{kind, normalized(*s->method->ret), normalized(next)};
        s->method->ret = next;
        return mu;
    }
    case ChangeKind::MethodAccessibilityChanged: {
        auto s = pick_method(any);
        if (!s) {
            return std::nullopt;
        }
        const std::string next = gen.other_access(s->method->access);
        Mutation mu{kind, detail::access_name(s->method->access), detail::access_name(next)};
        s->method->access = next;
        return mu;
    }
    case ChangeKind::ParamRenamed:
    case ChangeKind::ParamTypeChanged: {
        auto s = pick_method([](const GenClass &, const GenMethod &m) { return !m.params.empty(); });
        if (!s) {
            return std::nullopt;
        }
        GenParam &p = s->method->params[static_cast<std::size_t>(
            gen.uniform(0, static_cast<int>(s->method->params.size()) - 1))];
        if (kind == ChangeKind::ParamRenamed) {
            Mutation mu{kind, p.name, gen.fresh("p")};
            p.name = *mu.newValue;
            return mu;
        }
        const std::string next = gen.other_type(p.type);
        Mutation mu{kind, normalized(p.type), normalized(next)};
        p.type = next;
        return mu;
    }
    case ChangeKind::ParamAdded: {
        auto s = pick_method([](const GenClass &c, const GenMethod &m) {
            return !JavaGen::has_method_key(c, m.name, m.params.size() + 1);
        });
        if (!s) {
            return std::nullopt;
        }
        GenParam p{gen.type(), gen.fresh("p")};
        s->method->params.push_back(p);
        return Mutation{kind, std::nullopt, normalized(p.type)};
    }
    case ChangeKind::ParamRemoved: {
        auto s = pick_method([](const GenClass &c, const GenMethod &m) {
            return !m.params.empty() && !JavaGen::has_method_key(c, m.name, m.params.size() - 1);
        });
        if (!s) {
            return std::nullopt;
        }
        Mutation mu{kind, normalized(s->method->params.back().type), std::nullopt};
        s->method->params.pop_back();
        return mu;
    }
    case ChangeKind::FieldRenamed: {
        GenField *f = pick_field();
        if (f == nullptr) {
            return std::nullopt;
        }
        Mutation mu{kind, f->name, gen.fresh("f")};
        f->name = *mu.newValue;
        return mu;
    }
    case ChangeKind::FieldTypeChanged: {
        GenField *f = pick_field();
        if (f == nullptr) {
            return std::nullopt;
        }
        const std::string next = gen.other_type(f->type);
        Mutation mu{kind, normalized(f->type), normalized(next)};
        f->type = next;
        return mu;
    }
    case ChangeKind::FieldValueChanged: {
        GenField *f = pick_field();
        if (f == nullptr) {
            return std::nullopt;
        }
        std::optional<std::string> next;
        if (!f->init || gen.coin(0.7)) {
            do {
                next = gen.literal();
            } while (next == f->init);
        }
        Mutation mu{kind, f->init ? std::optional(normalized(*f->init)) : std::nullopt,
                    next ? std::optional(normalized(*next)) : std::nullopt};
        f->init = next;
        return mu;
    }
    case ChangeKind::FieldAccessibilityChanged: {
        GenField *f = pick_field();
        if (f == nullptr) {
            return std::nullopt;
        }
        const std::string next = gen.other_access(f->access);
        Mutation mu{kind, detail::access_name(f->access), detail::access_name(next)};
        f->access = next;
        return mu;
    }
    case ChangeKind::ElementAdded: {
        GenClass *c = gen.pick(classes);
        switch (gen.uniform(0, 2)) {
        case 0: {
            GenField f = gen.field();
            c->fields.push_back(f);
            return Mutation{kind, std::nullopt, detail::field_signature(f)};
        }
        case 1: {
            GenMethod m = gen.method(c->name);
            if (JavaGen::has_method_key(*c, m.name, m.params.size())) {
                return std::nullopt;
            }
            c->methods.push_back(m);
            return Mutation{kind, std::nullopt, detail::method_signature(m)};
        }
        default: {
            GenClass n = gen.klass(2);
            c->nested.push_back(n);
            return Mutation{kind, std::nullopt, "class " + n.name};
        }
        }
    }
    case ChangeKind::ElementRemoved: {
        GenClass *c = gen.pick(classes);
        const int choice = gen.uniform(0, 2);
        if (choice == 0 && !c->fields.empty()) {
            const auto i = static_cast<std::size_t>(gen.uniform(0, static_cast<int>(c->fields.size()) - 1));
            Mutation mu{kind, detail::field_signature(c->fields[i]), std::nullopt};
            c->fields.erase(c->fields.begin() + static_cast<std::ptrdiff_t>(i));
            return mu;
        }
        if (choice == 1 && !c->methods.empty()) {
            const auto i = static_cast<std::size_t>(gen.uniform(0, static_cast<int>(c->methods.size()) - 1));
            Mutation mu{kind, detail::method_signature(c->methods[i]), std::nullopt};
            c->methods.erase(c->methods.begin() + static_cast<std::ptrdiff_t>(i));
            return mu;
        }
        if (choice == 2 && !c->nested.empty()) {
            Mutation mu{kind, "class " + c->nested.back().name, std::nullopt};
            c->nested.pop_back();
            return mu;
        }
        return std::nullopt;
    }
    case ChangeKind::ModifierSetChanged: {
        // Class modifier sets carry the access keyword; member sets do not.
        auto toggle = [&](std::set<std::string> &mods, const std::string &access) {
            const std::string which = gen.coin() ? "final" : "static";
            std::set<std::string> before = mods;
            if (!mods.erase(which)) {
                mods.insert(which);
            }
            std::set<std::string> after = mods;
            if (!access.empty()) {
                before.insert(access);
                after.insert(access);
            }
            return Mutation{kind, detail::join(before), detail::join(after)};
        };
        const int choice = gen.uniform(0, 2);
        if (choice == 0 && !fields.empty()) {
            return toggle(pick_field()->mods, "");
        }
        if (choice == 1 && !methods.empty()) {
            return toggle(gen.pick(methods).method->mods, "");
        }
        GenClass *c = gen.pick(classes);
        return toggle(c->mods, c->access);
    }
    }
    return std::nullopt;
}

} // namespace conflict_radar::testing
