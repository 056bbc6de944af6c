#include "conflict_radar/agent.hpp"

#include "conflict_radar/protocol.hpp"

#include <algorithm>

namespace conflict_radar {

namespace {

ElementTree parse_or_empty(const std::optional<std::string> &content, const std::string &file)
{
    if (!content) {
        return ElementTree{file, {}};
    }
    try {
        return parse_unit(*content, file);
    } catch (const SyntaxError &) {
        return ElementTree{file, {}};
    }
}

enum class Attribute { Element, Name, Body, Type, ReturnType, Value, Access, Modifiers };

Attribute attribute_of(ChangeKind kind)
{
    switch (kind) {
    case ChangeKind::MethodBodyChanged:
        return Attribute::Body;
    case ChangeKind::MethodRenamed:
    case ChangeKind::FieldRenamed:
    case ChangeKind::ParamRenamed:
        return Attribute::Name;
    case ChangeKind::MethodReturnTypeChanged:
        return Attribute::ReturnType;
    case ChangeKind::ParamTypeChanged:
    case ChangeKind::FieldTypeChanged:
        return Attribute::Type;
    case ChangeKind::FieldValueChanged:
        return Attribute::Value;
    case ChangeKind::MethodAccessibilityChanged:
    case ChangeKind::FieldAccessibilityChanged:
        return Attribute::Access;
    case ChangeKind::ModifierSetChanged:
        return Attribute::Modifiers;
    default:
        return Attribute::Element;
    }
}

// The single attribute all kinds agree on, or Element.
Attribute common_attribute(const std::set<ChangeKind> &kinds)
{
    std::optional<Attribute> out;
    for (const ChangeKind k : kinds) {
        const Attribute a = attribute_of(k);
        if (out && *out != a) {
            return Attribute::Element;
        }
        out = a;
    }
    return out.value_or(Attribute::Element);
}

const ClassDecl *find_class(const std::vector<ClassDecl> &classes, const std::string &name)
{
    const auto it = std::find_if(classes.begin(), classes.end(),
                                 [&](const ClassDecl &c) { return c.name == name; });
    return it == classes.end() ? nullptr : &*it;
}

} // namespace

std::optional<Span> attribute_span(const ElementTree &tree, const SemanticPath &path,
                                   const std::set<ChangeKind> &kinds)
{
    const Attribute attr = common_attribute(kinds);
    const ClassDecl *cls = nullptr;
    const std::vector<ClassDecl> *scope = &tree.classes;
    for (const std::string &name : path.classChain) {
        const ClassDecl *next = find_class(*scope, name);
        if (next == nullptr) {
            return cls ? std::optional(cls->nameSpan) : std::nullopt;
        }
        cls = next;
        scope = &cls->classes;
    }
    if (cls == nullptr) {
        return std::nullopt;
    }
    if (!path.member) {
        if (attr == Attribute::Modifiers && cls->modifierSpan) {
            return cls->modifierSpan;
        }
        return attr == Attribute::Element && kinds.size() > 1 ? cls->span : cls->nameSpan;
    }
    if (path.member->kind == MemberKind::Field) {
        const auto it = std::find_if(cls->fields.begin(), cls->fields.end(),
                                     [&](const FieldDecl &f) { return f.name == path.member->name; });
        if (it == cls->fields.end()) {
            return cls->nameSpan;
        }
        switch (attr) {
        case Attribute::Type:
            return it->typeSpan;
        case Attribute::Value:
            return it->initializerSpan.value_or(it->nameSpan);
        case Attribute::Access:
            return it->accessSpan.value_or(it->nameSpan);
        case Attribute::Modifiers:
            return it->modifierSpan.value_or(it->nameSpan);
        case Attribute::Element:
            return kinds.size() > 1 ? it->span : it->nameSpan;
        default:
            return it->nameSpan;
        }
    }
    const auto m = std::find_if(cls->methods.begin(), cls->methods.end(), [&](const MethodDecl &x) {
        return x.name == path.member->name && x.arity() == path.member->arity;
    });
    if (m == cls->methods.end()) {
        return cls->nameSpan;
    }
    if (path.param) {
        const auto p = std::find_if(m->params.begin(), m->params.end(),
                                    [&](const ParamDecl &x) { return x.name == *path.param; });
        if (p == m->params.end()) {
            return m->paramListSpan;
        }
        switch (attr) {
        case Attribute::Type:
            return p->typeSpan;
        case Attribute::Name:
            return p->nameSpan;
        default:
            return p->span;
        }
    }
    switch (attr) {
    case Attribute::Body:
        return m->bodySpan.value_or(m->nameSpan);
    case Attribute::ReturnType:
        return m->returnTypeSpan.value_or(m->nameSpan);
    case Attribute::Access:
        return m->accessSpan.value_or(m->nameSpan);
    case Attribute::Modifiers:
        return m->modifierSpan.value_or(m->nameSpan);
    case Attribute::Element:
        return kinds.size() > 1 ? m->span : m->nameSpan;
    default:
        return m->nameSpan;
    }
}

WorkspaceAgent::WorkspaceAgent(std::string project, std::string author)
    : project_(std::move(project)), author_(std::move(author))
{
    local_.author = author_;
}

void WorkspaceAgent::reset(RevisionStamp base, const std::map<std::string, std::string> &baseline)
{
    base_ = base;
    baseline_.clear();
    published_.clear();
    for (const auto &[file, content] : baseline) {
        baseline_[file] = content;
        published_[file] = parse_or_empty(content, file);
    }
    current_ = baseline_;
    journal_.clear();
    local_ = ChangeSet{author_, base_, {}};
    lastFolded_ = nextSeq_ - 1;
    announce_ = true;
}

BurstResult WorkspaceAgent::on_burst(const std::map<std::string, std::optional<std::string>> &files,
                                     std::int64_t atMillis)
{
    for (const auto &[file, content] : files) {
        current_[file] = content;
        touched_.insert(file);
    }

    BurstResult result;
    std::map<std::string, ElementTree> trees;
    for (const std::string &file : touched_) {
        const std::optional<std::string> &content = current_[file];
        if (!content) {
            trees[file] = ElementTree{file, {}};
            continue;
        }
        try {
            trees[file] = parse_unit(*content, file);
        } catch (const SyntaxError &e) {
            result.errors[file] = std::to_string(e.span().startLine) + ":" +
                                  std::to_string(e.span().startCol) + ": " + e.what();
        }
    }
    if (!result.errors.empty()) {
        result.outcome = BurstOutcome::Held;
        return result;
    }

    ChangeSet delta{author_, base_, {}};
    for (const std::string &file : touched_) {
        const auto base = baseline_.find(file);
        const std::optional<std::string> original =
            base == baseline_.end() ? std::nullopt : base->second;
        if (current_[file] == original) {
            published_[file] = parse_or_empty(original, file);
            journal_.forget_file(file);
            const ChangeSet purged = purge_on_revert(local_, file);
            if (purged != local_) {
                local_ = purged;
                result.reverted.push_back(file);
            }
            continue;
        }
        const auto last = published_.try_emplace(file, ElementTree{file, {}}).first;
        ExtractOptions opts{project_, author_, base_, nextSeq_, atMillis};
        const ChangeSet raw = extract_changes(last->second, trees[file], opts);
        nextSeq_ += raw.changes.size();
        const ChangeSet translated = journal_.translate(raw);
        delta.changes.insert(delta.changes.end(), translated.changes.begin(), translated.changes.end());
        last->second = std::move(trees[file]);
    }
    touched_.clear();

    delta = consolidate(delta);
    fold_delta(local_, lastFolded_, delta);
    if (!delta.changes.empty() || announce_) {
        announce_ = false;
        result.outcome = BurstOutcome::Published;
        result.delta = std::move(delta);
    }
    return result;
}

std::optional<Span> WorkspaceAgent::locate(const SemanticPath &path, const std::set<ChangeKind> &kinds) const
{
    const auto it = published_.find(path.file);
    if (it == published_.end()) {
        return std::nullopt;
    }
    return attribute_span(it->second, journal_.locate(path), kinds);
}

} // namespace conflict_radar
