#pragma once

#include "conflict_radar/syntax.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace conflict_radar {

enum class MemberKind { Field, Method };

struct MemberRef {
    MemberKind kind = MemberKind::Field;
    std::string name;
    // Parameter count; always 0 for fields. Part of the identity, never rendered.
    std::size_t arity = 0;

    friend auto operator<=>(const MemberRef &, const MemberRef &) = default;
};

// Structured address of a semantic element inside a project. A path with no
// member names the innermost class of the chain.
struct SemanticPath {
    std::string project;
    std::string file;
    std::vector<std::string> classChain;
    std::optional<MemberRef> member;
    // Only meaningful when member is a method.
    std::optional<std::string> param;

    bool well_formed() const;
    // True when `other` equals this path or names an element nested in it.
    bool encloses(const SemanticPath &other) const;

    friend auto operator<=>(const SemanticPath &, const SemanticPath &) = default;
};

struct SemanticPathHash {
    std::size_t operator()(const SemanticPath &path) const noexcept;
};

// "project/file/Class[/Nested...][/member[/param]]"; display only.
std::string render_path_id(const SemanticPath &path);

// Replaces the leading `from` part of `path` with `to`. `from` must enclose
// `path` and be of the same depth as `to`.
SemanticPath rebase(const SemanticPath &path, const SemanticPath &from, const SemanticPath &to);

// The path itself followed by each enclosing element's path, innermost first.
std::vector<SemanticPath> lineage(const SemanticPath &path);

enum class ChangeKind {
    MethodBodyChanged,
    MethodRenamed,
    MethodReturnTypeChanged,
    MethodAccessibilityChanged,
    ParamRenamed,
    ParamTypeChanged,
    ParamAdded,
    ParamRemoved,
    FieldRenamed,
    FieldTypeChanged,
    FieldValueChanged,
    FieldAccessibilityChanged,
    ElementAdded,
    ElementRemoved,
    ModifierSetChanged,
};

inline constexpr std::size_t kChangeKindCount = 15;
// The kinds after the first twelve are bookkeeping extensions.
inline constexpr std::size_t kTaxonomyKindCount = 12;

std::string_view to_string(ChangeKind kind);
std::optional<ChangeKind> change_kind_from_string(std::string_view text);
std::vector<ChangeKind> all_change_kinds();
bool is_rename(ChangeKind kind);
bool is_plumbing(ChangeKind kind);

struct RevisionStamp {
    std::uint64_t value = 0;

    friend auto operator<=>(const RevisionStamp &, const RevisionStamp &) = default;
};

struct SemanticChange {
    ChangeKind kind = ChangeKind::MethodBodyChanged;
    SemanticPath path;
    std::optional<std::string> oldValue;
    std::optional<std::string> newValue;
    // Body fingerprints; set only on MethodBodyChanged.
    std::optional<std::uint64_t> oldFingerprint;
    std::optional<std::uint64_t> newFingerprint;
    std::string author;
    RevisionStamp baseRevision;
    std::uint64_t seq = 0;
    std::int64_t atMillis = 0;
    Span decorationSpan;
    // Where the element lives after this change, when a rename or a parameter
    // count change moved it.
    std::optional<SemanticPath> newPath;

    friend bool operator==(const SemanticChange &, const SemanticChange &) = default;
};

struct ChangeSet {
    std::string author;
    RevisionStamp baseRevision;
    std::vector<SemanticChange> changes;

    bool empty() const { return changes.empty(); }
    std::uint64_t max_seq() const { return changes.empty() ? 0 : changes.back().seq; }
    friend bool operator==(const ChangeSet &, const ChangeSet &) = default;
};

enum class Severity { Awareness, Conflict };

std::string_view to_string(Severity severity);
std::optional<Severity> severity_from_string(std::string_view text);

struct ConflictReport {
    std::string pathId;
    SemanticPath path;
    Severity severity = Severity::Awareness;
    std::set<ChangeKind> localKinds;
    std::set<std::string> remoteAuthors;
    std::set<ChangeKind> remoteKinds;
    Span decorationSpan;

    friend bool operator==(const ConflictReport &, const ConflictReport &) = default;
};

} // namespace conflict_radar
