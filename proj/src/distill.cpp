#include "conflict_radar/distill.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace conflict_radar {

namespace {

std::string join_modifiers(const std::set<std::string> &mods)
{
    std::string out;
    for (const std::string &m : mods) {
        if (!out.empty()) {
            out += ' ';
        }
        out += m;
    }
    return out;
}

std::vector<std::string> param_types(const MethodDecl &m)
{
    std::vector<std::string> out;
    for (const ParamDecl &p : m.params) {
        out.push_back(p.type);
    }
    return out;
}

class Differ {
public:
    explicit Differ(const ExtractOptions &options) : opts_(options) {}

    void classes(const std::vector<ClassDecl> &before, const std::vector<ClassDecl> &after,
                 const std::vector<std::string> &chain, const ClassDecl *enclosingAfter)
    {
        std::vector<bool> used(after.size(), false);
        for (const ClassDecl &b : before) {
            auto chainB = chain;
            chainB.push_back(b.name);
            const auto it = std::find_if(after.begin(), after.end(), [&](const ClassDecl &a) {
                return a.name == b.name && a.keyword == b.keyword;
            });
            if (it == after.end()) {
                emit(ChangeKind::ElementRemoved, class_path(chainB), signature(b), std::nullopt,
                     removal_span(enclosingAfter));
                continue;
            }
            used[static_cast<std::size_t>(it - after.begin())] = true;
            one_class(b, *it, chainB);
        }
        for (std::size_t i = 0; i < after.size(); ++i) {
            if (!used[i]) {
                auto chainA = chain;
                chainA.push_back(after[i].name);
                add(class_path(chainA), signature(after[i]), after[i].nameSpan);
            }
        }
    }

    ChangeSet finish()
    {
        ChangeSet set;
        set.author = opts_.author;
        set.baseRevision = opts_.baseRevision;
        set.changes = std::move(changes_);
        for (SemanticChange &c : additions_) {
            set.changes.push_back(std::move(c));
        }
        std::uint64_t seq = opts_.firstSeq;
        for (SemanticChange &c : set.changes) {
            c.seq = seq++;
        }
        return set;
    }

private:
    void one_class(const ClassDecl &b, const ClassDecl &a, const std::vector<std::string> &chain)
    {
        if (b.modifiers != a.modifiers) {
            emit(ChangeKind::ModifierSetChanged, class_path(chain), join_modifiers(b.modifiers),
                 join_modifiers(a.modifiers), a.modifierSpan.value_or(a.nameSpan));
        }
        fields(b, a, chain);
        methods(b, a, chain);
        classes(b.classes, a.classes, chain, &a);
    }

    void fields(const ClassDecl &b, const ClassDecl &a, const std::vector<std::string> &chain)
    {
        std::vector<int> pairOf(b.fields.size(), -1);
        std::vector<bool> used(a.fields.size(), false);
        for (std::size_t i = 0; i < b.fields.size(); ++i) {
            for (std::size_t j = 0; j < a.fields.size(); ++j) {
                if (!used[j] && a.fields[j].name == b.fields[i].name) {
                    pairOf[i] = static_cast<int>(j);
                    used[j] = true;
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < b.fields.size(); ++i) {
            if (pairOf[i] >= 0) {
                continue;
            }
            for (std::size_t j = 0; j < a.fields.size(); ++j) {
                if (!used[j] && a.fields[j].type == b.fields[i].type &&
                    a.fields[j].initializer == b.fields[i].initializer) {
                    pairOf[i] = static_cast<int>(j);
                    used[j] = true;
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < b.fields.size(); ++i) {
            const FieldDecl &fb = b.fields[i];
            const SemanticPath path = member_path(chain, MemberKind::Field, fb.name, 0);
            if (pairOf[i] < 0) {
                emit(ChangeKind::ElementRemoved, path, signature(fb), std::nullopt, a.nameSpan);
                continue;
            }
            const FieldDecl &fa = a.fields[static_cast<std::size_t>(pairOf[i])];
            if (fb.name != fa.name) {
                emit(ChangeKind::FieldRenamed, path, fb.name, fa.name, fa.nameSpan)
                    .newPath = member_path(chain, MemberKind::Field, fa.name, 0);
            }
            if (fb.type != fa.type) {
                emit(ChangeKind::FieldTypeChanged, path, fb.type, fa.type, fa.typeSpan);
            }
            if (fb.initializer != fa.initializer) {
                emit(ChangeKind::FieldValueChanged, path, fb.initializer, fa.initializer,
                     fa.initializerSpan.value_or(fa.nameSpan));
            }
            if (fb.access != fa.access) {
                emit(ChangeKind::FieldAccessibilityChanged, path, std::string(to_string(fb.access)),
                     std::string(to_string(fa.access)), fa.accessSpan.value_or(fa.nameSpan));
            }
            if (fb.modifiers != fa.modifiers) {
                emit(ChangeKind::ModifierSetChanged, path, join_modifiers(fb.modifiers),
                     join_modifiers(fa.modifiers), fa.modifierSpan.value_or(fa.nameSpan));
            }
        }
        for (std::size_t j = 0; j < a.fields.size(); ++j) {
            if (!used[j]) {
                add(member_path(chain, MemberKind::Field, a.fields[j].name, 0),
                    signature(a.fields[j]), a.fields[j].nameSpan);
            }
        }
    }

    void methods(const ClassDecl &b, const ClassDecl &a, const std::vector<std::string> &chain)
    {
        const auto &mb = b.methods;
        const auto &ma = a.methods;
        std::vector<int> pairOf(mb.size(), -1);
        std::vector<bool> used(ma.size(), false);
        auto pass = [&](auto &&qualifies) {
            for (std::size_t i = 0; i < mb.size(); ++i) {
                if (pairOf[i] >= 0) {
                    continue;
                }
                for (std::size_t j = 0; j < ma.size(); ++j) {
                    if (!used[j] && qualifies(mb[i], ma[j])) {
                        pairOf[i] = static_cast<int>(j);
                        used[j] = true;
                        break;
                    }
                }
            }
        };
        pass([](const MethodDecl &x, const MethodDecl &y) {
            return x.name == y.name && x.arity() == y.arity();
        });
        pass([](const MethodDecl &x, const MethodDecl &y) {
            return !x.isConstructor() && !y.isConstructor() && x.returnType == y.returnType &&
                   param_types(x) == param_types(y) && x.bodyFingerprint == y.bodyFingerprint &&
                   x.bodySpan.has_value() == y.bodySpan.has_value();
        });
        pass([](const MethodDecl &x, const MethodDecl &y) { return x.name == y.name; });

        for (std::size_t i = 0; i < mb.size(); ++i) {
            const SemanticPath path =
                member_path(chain, MemberKind::Method, mb[i].name, mb[i].arity());
            if (pairOf[i] < 0) {
                emit(ChangeKind::ElementRemoved, path, signature(mb[i]), std::nullopt, a.nameSpan);
                continue;
            }
            method_pair(mb[i], ma[static_cast<std::size_t>(pairOf[i])], chain, path);
        }
        for (std::size_t j = 0; j < ma.size(); ++j) {
            if (!used[j]) {
                add(member_path(chain, MemberKind::Method, ma[j].name, ma[j].arity()),
                    signature(ma[j]), ma[j].nameSpan);
            }
        }
    }

    void method_pair(const MethodDecl &b, const MethodDecl &a,
                     const std::vector<std::string> &chain, const SemanticPath &path)
    {
        const SemanticPath after = member_path(chain, MemberKind::Method, a.name, a.arity());
        if (b.name != a.name) {
            emit(ChangeKind::MethodRenamed, path, b.name, a.name, a.nameSpan).newPath = after;
        }
        if (b.returnType != a.returnType) {
            emit(ChangeKind::MethodReturnTypeChanged, path, b.returnType, a.returnType,
                 a.returnTypeSpan.value_or(a.nameSpan));
        }
        if (b.access != a.access) {
            emit(ChangeKind::MethodAccessibilityChanged, path, std::string(to_string(b.access)),
                 std::string(to_string(a.access)), a.accessSpan.value_or(a.nameSpan));
        }
        if (b.modifiers != a.modifiers) {
            emit(ChangeKind::ModifierSetChanged, path, join_modifiers(b.modifiers),
                 join_modifiers(a.modifiers), a.modifierSpan.value_or(a.nameSpan));
        }

        const std::size_t common = std::min(b.params.size(), a.params.size());
        for (std::size_t k = 0; k < common; ++k) {
            const ParamDecl &pb = b.params[k];
            const ParamDecl &pa = a.params[k];
            SemanticPath paramPath = path;
            paramPath.param = pb.name;
            if (pb.name != pa.name) {
                SemanticPath moved = after;
                moved.param = pa.name;
                emit(ChangeKind::ParamRenamed, paramPath, pb.name, pa.name, pa.nameSpan).newPath =
                    moved;
            }
            if (pb.type != pa.type) {
                emit(ChangeKind::ParamTypeChanged, paramPath, pb.type, pa.type, pa.typeSpan);
            }
        }
        for (std::size_t k = common; k < b.params.size(); ++k) {
            SemanticPath paramPath = path;
            paramPath.param = b.params[k].name;
            emit(ChangeKind::ParamRemoved, paramPath, b.params[k].type, std::nullopt, a.nameSpan)
                .newPath = after;
        }
        for (std::size_t k = common; k < a.params.size(); ++k) {
            SemanticPath paramPath = path;
            paramPath.param = a.params[k].name;
            emit(ChangeKind::ParamAdded, paramPath, std::nullopt, a.params[k].type,
                 a.params[k].span)
                .newPath = after;
        }

        if (b.bodyFingerprint != a.bodyFingerprint ||
            b.bodySpan.has_value() != a.bodySpan.has_value()) {
            SemanticChange &c = emit(ChangeKind::MethodBodyChanged, path, std::nullopt,
                                     std::nullopt, a.bodySpan.value_or(a.nameSpan));
            c.oldFingerprint = b.bodyFingerprint;
            c.newFingerprint = a.bodyFingerprint;
        }
    }

    SemanticChange &emit(ChangeKind kind, SemanticPath path, std::optional<std::string> oldValue,
                         std::optional<std::string> newValue, const Span &span)
    {
        changes_.push_back(make(kind, std::move(path), std::move(oldValue),
                                std::move(newValue), span));
        return changes_.back();
    }

    void add(SemanticPath path, std::string value, const Span &span)
    {
        additions_.push_back(
            make(ChangeKind::ElementAdded, std::move(path), std::nullopt, std::move(value), span));
    }

    SemanticChange make(ChangeKind kind, SemanticPath path, std::optional<std::string> oldValue,
                        std::optional<std::string> newValue, const Span &span) const
    {
        SemanticChange c;
        c.kind = kind;
        c.path = std::move(path);
        c.oldValue = std::move(oldValue);
        c.newValue = std::move(newValue);
        c.author = opts_.author;
        c.baseRevision = opts_.baseRevision;
        c.atMillis = opts_.atMillis;
        c.decorationSpan = span;
        return c;
    }

    SemanticPath class_path(const std::vector<std::string> &chain) const
    {
        return SemanticPath{opts_.project, file_, chain, std::nullopt, std::nullopt};
    }

    SemanticPath member_path(const std::vector<std::string> &chain, MemberKind kind,
                             const std::string &name, std::size_t arity) const
    {
        return SemanticPath{opts_.project, file_, chain, MemberRef{kind, name, arity},
                            std::nullopt};
    }

    static Span removal_span(const ClassDecl *enclosing)
    {
        return enclosing != nullptr ? enclosing->nameSpan : Span{};
    }

public:
    std::string file_;

private:
    const ExtractOptions &opts_;
    std::vector<SemanticChange> changes_;
    std::vector<SemanticChange> additions_;
};

// Attribute groups consolidated independently per element.
enum class Group {
    Name,
    ReturnType,
    Access,
    Modifiers,
    Body,
    Type,
    Value,
    ParamExistence,
    ElementExistence,
};

Group group_of(ChangeKind kind)
{
    switch (kind) {
    case ChangeKind::MethodRenamed:
    case ChangeKind::FieldRenamed:
    case ChangeKind::ParamRenamed:
        return Group::Name;
    case ChangeKind::MethodReturnTypeChanged:
        return Group::ReturnType;
    case ChangeKind::MethodAccessibilityChanged:
    case ChangeKind::FieldAccessibilityChanged:
        return Group::Access;
    case ChangeKind::ModifierSetChanged:
        return Group::Modifiers;
    case ChangeKind::MethodBodyChanged:
        return Group::Body;
    case ChangeKind::ParamTypeChanged:
    case ChangeKind::FieldTypeChanged:
        return Group::Type;
    case ChangeKind::FieldValueChanged:
        return Group::Value;
    case ChangeKind::ParamAdded:
    case ChangeKind::ParamRemoved:
        return Group::ParamExistence;
    case ChangeKind::ElementAdded:
    case ChangeKind::ElementRemoved:
        break;
    }
    return Group::ElementExistence;
}

bool is_addition(ChangeKind kind)
{
    return kind == ChangeKind::ElementAdded || kind == ChangeKind::ParamAdded;
}

} // namespace

ChangeSet extract_changes(const ElementTree &before, const ElementTree &after,
                          const ExtractOptions &options)
{
    if (before.filePath != after.filePath) {
        throw MismatchedFile("cannot diff '" + before.filePath + "' against '" +
                             after.filePath + "'");
    }
    Differ differ(options);
    differ.file_ = before.filePath;
    differ.classes(before.classes, after.classes, {}, nullptr);
    return differ.finish();
}

SemanticPath PathJournal::resolve(const SemanticPath &current) const
{
    for (const SemanticPath &ancestor : lineage(current)) {
        if (const auto it = aliases_.find(ancestor); it != aliases_.end()) {
            return rebase(current, ancestor, it->second);
        }
    }
    return current;
}

SemanticPath PathJournal::locate(const SemanticPath &base) const
{
    const std::pair<const SemanticPath, SemanticPath> *best = nullptr;
    std::size_t depth = 0;
    for (const auto &entry : aliases_) {
        if (!entry.second.encloses(base)) {
            continue;
        }
        const std::size_t d = lineage(entry.second).size();
        if (best == nullptr || d > depth) {
            best = &entry;
            depth = d;
        }
    }
    return best == nullptr ? base : rebase(base, best->second, best->first);
}

ChangeSet PathJournal::translate(const ChangeSet &delta)
{
    // Every path except an addition's names the element in the delta's
    // `before` tree, so resolve them all before learning new aliases.
    ChangeSet out = delta;
    for (SemanticChange &c : out.changes) {
        if (c.kind != ChangeKind::ElementAdded) {
            c.path = resolve(c.path);
        }
    }
    for (std::size_t i = 0; i < delta.changes.size(); ++i) {
        const SemanticChange &c = delta.changes[i];
        if (c.kind == ChangeKind::ElementAdded) {
            std::erase_if(aliases_, [&](const auto &entry) { return c.path.encloses(entry.first); });
            continue;
        }
        if (!c.newPath) {
            continue;
        }
        SemanticPath source = c.path;
        if (!c.newPath->param) {
            source.param.reset();
        }
        SemanticPath origin = out.changes[i].path;
        if (!c.newPath->param) {
            origin.param.reset();
        }
        std::vector<std::pair<SemanticPath, SemanticPath>> moved;
        for (const auto &[key, base] : aliases_) {
            if (source.encloses(key) && key != source) {
                moved.emplace_back(rebase(key, source, *c.newPath), base);
            }
        }
        for (auto &[key, base] : moved) {
            aliases_[std::move(key)] = std::move(base);
        }
        if (*c.newPath == origin) {
            aliases_.erase(*c.newPath);
        } else {
            aliases_[*c.newPath] = origin;
        }
    }
    return out;
}

void PathJournal::forget_file(const std::string &file)
{
    std::erase_if(aliases_, [&](const auto &entry) { return entry.first.file == file; });
}

ChangeSet consolidate(const ChangeSet &input)
{
    const auto &changes = input.changes;
    std::map<std::pair<SemanticPath, Group>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < changes.size(); ++i) {
        groups[{changes[i].path, group_of(changes[i].kind)}].push_back(i);
    }

    std::vector<bool> dropped(changes.size(), false);
    // An element removed at the end makes its earlier edits moot; an element
    // that did not exist at the start reports only its addition.
    for (const auto &[key, idx] : groups) {
        if (key.second != Group::ElementExistence) {
            continue;
        }
        const SemanticChange &first = changes[idx.front()];
        const SemanticChange &last = changes[idx.back()];
        for (std::size_t i = 0; i < changes.size(); ++i) {
            if (!key.first.encloses(changes[i].path) ||
                (changes[i].path == key.first && group_of(changes[i].kind) == key.second)) {
                continue;
            }
            if (last.kind == ChangeKind::ElementRemoved && changes[i].seq < last.seq) {
                dropped[i] = true;
            }
            if (first.kind == ChangeKind::ElementAdded && changes[i].seq > first.seq) {
                dropped[i] = true;
            }
        }
    }

    std::vector<SemanticChange> survivors;
    for (const auto &[key, all] : groups) {
        std::vector<std::size_t> idx;
        std::copy_if(all.begin(), all.end(), std::back_inserter(idx),
                     [&](std::size_t i) { return !dropped[i]; });
        if (idx.empty()) {
            continue;
        }
        const SemanticChange &first = changes[idx.front()];
        const SemanticChange &last = changes[idx.back()];
        if (key.second == Group::ElementExistence || key.second == Group::ParamExistence) {
            const bool existedBefore = !is_addition(first.kind);
            const bool existsAfter = is_addition(last.kind);
            if (existedBefore == existsAfter) {
                // Restored, or created and deleted again: nothing to report,
                // unless a parameter came back with a different type.
                if (existedBefore && key.second == Group::ParamExistence &&
                    first.oldValue != last.newValue) {
                    survivors.push_back(first);
                    survivors.push_back(last);
                }
                continue;
            }
            SemanticChange net = last;
            if (!existsAfter) {
                net.oldValue = first.oldValue;
            }
            survivors.push_back(std::move(net));
            continue;
        }
        SemanticChange net = last;
        net.oldValue = first.oldValue;
        net.oldFingerprint = first.oldFingerprint;
        const bool noop = key.second == Group::Body ? net.oldFingerprint == net.newFingerprint
                                                    : net.oldValue == net.newValue;
        if (!noop) {
            survivors.push_back(std::move(net));
        }
    }
    std::sort(survivors.begin(), survivors.end(),
              [](const SemanticChange &x, const SemanticChange &y) { return x.seq < y.seq; });

    ChangeSet out;
    out.author = input.author;
    out.baseRevision = input.baseRevision;
    out.changes = std::move(survivors);
    return out;
}

std::vector<RenameAlias> rename_aliases(const ChangeSet &changes)
{
    std::vector<RenameAlias> out;
    for (const SemanticChange &c : changes.changes) {
        if (!is_rename(c.kind) || !c.newValue) {
            continue;
        }
        SemanticPath renamed = c.path;
        if (c.kind == ChangeKind::ParamRenamed) {
            renamed.param = *c.newValue;
        } else if (renamed.member) {
            renamed.member->name = *c.newValue;
        }
        if (renamed != c.path) {
            out.push_back(RenameAlias{c.path, std::move(renamed), c.author});
        }
    }
    return out;
}

std::string signature(const FieldDecl &field)
{
    return field.type + " " + field.name;
}

std::string signature(const MethodDecl &method)
{
    std::string out = method.returnType ? *method.returnType + " " : std::string();
    out += method.name + "(";
    for (std::size_t i = 0; i < method.params.size(); ++i) {
        if (i != 0) {
            out += ", ";
        }
        out += method.params[i].type;
    }
    return out + ")";
}

std::string signature(const ClassDecl &cls)
{
    return cls.keyword + " " + cls.name;
}

} // namespace conflict_radar
