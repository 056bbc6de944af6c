#include "conflict_radar/model.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <utility>

namespace conflict_radar {

namespace {

constexpr std::array<std::pair<ChangeKind, std::string_view>, kChangeKindCount> kKindNames = {{
    {ChangeKind::MethodBodyChanged, "MethodBodyChanged"},
    {ChangeKind::MethodRenamed, "MethodRenamed"},
    {ChangeKind::MethodReturnTypeChanged, "MethodReturnTypeChanged"},
    {ChangeKind::MethodAccessibilityChanged, "MethodAccessibilityChanged"},
    {ChangeKind::ParamRenamed, "ParamRenamed"},
    {ChangeKind::ParamTypeChanged, "ParamTypeChanged"},
    {ChangeKind::ParamAdded, "ParamAdded"},
    {ChangeKind::ParamRemoved, "ParamRemoved"},
    {ChangeKind::FieldRenamed, "FieldRenamed"},
    {ChangeKind::FieldTypeChanged, "FieldTypeChanged"},
    {ChangeKind::FieldValueChanged, "FieldValueChanged"},
    {ChangeKind::FieldAccessibilityChanged, "FieldAccessibilityChanged"},
    {ChangeKind::ElementAdded, "ElementAdded"},
    {ChangeKind::ElementRemoved, "ElementRemoved"},
    {ChangeKind::ModifierSetChanged, "ModifierSetChanged"},
}};

void hash_combine(std::size_t &seed, std::size_t value)
{
    seed ^= value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

} // namespace

bool SemanticPath::well_formed() const
{
    if (classChain.empty()) {
        return false;
    }
    if (param && (!member || member->kind != MemberKind::Method)) {
        return false;
    }
    return !member || member->kind == MemberKind::Method || member->arity == 0;
}

bool SemanticPath::encloses(const SemanticPath &other) const
{
    if (project != other.project || file != other.file ||
        classChain.size() > other.classChain.size()) {
        return false;
    }
    if (!std::equal(classChain.begin(), classChain.end(), other.classChain.begin())) {
        return false;
    }
    if (!member) {
        return true;
    }
    if (classChain.size() != other.classChain.size() || other.member != member) {
        return false;
    }
    return !param || other.param == param;
}

std::size_t SemanticPathHash::operator()(const SemanticPath &path) const noexcept
{
    const std::hash<std::string> h;
    std::size_t seed = h(path.project);
    hash_combine(seed, h(path.file));
    for (const std::string &cls : path.classChain) {
        hash_combine(seed, h(cls));
    }
    if (path.member) {
        hash_combine(seed, static_cast<std::size_t>(path.member->kind) + 1);
        hash_combine(seed, h(path.member->name));
        hash_combine(seed, path.member->arity);
    }
    if (path.param) {
        hash_combine(seed, h(*path.param) + 7);
    }
    return seed;
}

std::string render_path_id(const SemanticPath &path)
{
    std::string out = path.project;
    out += '/';
    out += path.file;
    for (const std::string &cls : path.classChain) {
        out += '/';
        out += cls;
    }
    if (path.member) {
        out += '/';
        out += path.member->name;
    }
    if (path.param) {
        out += '/';
        out += *path.param;
    }
    return out;
}

SemanticPath rebase(const SemanticPath &path, const SemanticPath &from, const SemanticPath &to)
{
    SemanticPath out = to;
    if (from.param) {
        return out;
    }
    if (from.member) {
        if (!out.param) {
            out.param = path.param;
        }
        return out;
    }
    out.classChain.insert(out.classChain.end(),
                          path.classChain.begin() +
                              static_cast<std::ptrdiff_t>(from.classChain.size()),
                          path.classChain.end());
    out.member = path.member;
    out.param = path.param;
    return out;
}

std::vector<SemanticPath> lineage(const SemanticPath &path)
{
    std::vector<SemanticPath> out;
    SemanticPath p = path;
    out.push_back(p);
    if (p.param) {
        p.param.reset();
        out.push_back(p);
    }
    if (p.member) {
        p.member.reset();
        out.push_back(p);
    }
    while (p.classChain.size() > 1) {
        p.classChain.pop_back();
        out.push_back(p);
    }
    return out;
}

std::string_view to_string(ChangeKind kind)
{
    return kKindNames[static_cast<std::size_t>(kind)].second;
}

std::optional<ChangeKind> change_kind_from_string(std::string_view text)
{
    for (const auto &[kind, name] : kKindNames) {
        if (name == text) {
            return kind;
        }
    }
    return std::nullopt;
}

std::vector<ChangeKind> all_change_kinds()
{
    std::vector<ChangeKind> out;
    for (const auto &entry : kKindNames) {
        out.push_back(entry.first);
    }
    return out;
}

bool is_rename(ChangeKind kind)
{
    return kind == ChangeKind::MethodRenamed || kind == ChangeKind::ParamRenamed ||
           kind == ChangeKind::FieldRenamed;
}

bool is_plumbing(ChangeKind kind)
{
    return static_cast<std::size_t>(kind) >= kTaxonomyKindCount;
}

std::string_view to_string(Severity severity)
{
    return severity == Severity::Conflict ? "Conflict" : "Awareness";
}

std::optional<Severity> severity_from_string(std::string_view text)
{
    if (text == "Conflict") {
        return Severity::Conflict;
    }
    if (text == "Awareness") {
        return Severity::Awareness;
    }
    return std::nullopt;
}

} // namespace conflict_radar
