#pragma once

#include "conflict_radar/model.hpp"
#include "conflict_radar/syntax.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace conflict_radar {

class MismatchedFile : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExtractOptions {
    std::string project;
    std::string author;
    RevisionStamp baseRevision;
    // Sequence number of the first emitted change; later ones count up.
    std::uint64_t firstSeq = 1;
    std::int64_t atMillis = 0;
};

// Diffs two parses of the same file into semantic changes.
//
// Classes match by name. Members match by (kind, name, arity) first; the
// leftovers are then tested for renames (methods need equal parameter types,
// return type and body fingerprint, fields need equal type and initializer),
// and remaining methods sharing a name are paired so parameter lists can be
// compared position by position. Changes on an existing element carry its
// path in `before`; ElementAdded carries the path in `after`. Additions are
// emitted after every other change.
ChangeSet extract_changes(const ElementTree &before, const ElementTree &after,
                          const ExtractOptions &options);

// Rewrites the paths of successive extract_changes() results (each named
// after its own `before` tree) to the element's path at the base revision.
// One journal per author; reset it whenever the base revision moves.
class PathJournal {
public:
    ChangeSet translate(const ChangeSet &delta);
    SemanticPath resolve(const SemanticPath &current) const;
    // Inverse of resolve(): where a base-revision path lives now.
    SemanticPath locate(const SemanticPath &base) const;
    // Drops every alias inside `file`, e.g. after a revert.
    void forget_file(const std::string &file);
    void clear() { aliases_.clear(); }
    std::size_t size() const { return aliases_.size(); }

private:
    std::map<SemanticPath, SemanticPath> aliases_; // current path -> base path
};

// Collapses a seq-ordered, base-path-keyed change list to its net effect per
// element and attribute. Survivors keep the seq, time, span and newPath of
// their last edit and the old value of their first.
ChangeSet consolidate(const ChangeSet &changes);

struct RenameAlias {
    SemanticPath oldPath;
    SemanticPath newPath;
    std::string author;

    friend bool operator==(const RenameAlias &, const RenameAlias &) = default;
};

// One alias per *Renamed change; newPath differs from oldPath only in the
// renamed segment.
std::vector<RenameAlias> rename_aliases(const ChangeSet &changes);

// Human-readable signature used as ElementAdded/ElementRemoved values.
std::string signature(const FieldDecl &field);
std::string signature(const MethodDecl &method);
std::string signature(const ClassDecl &cls);

} // namespace conflict_radar
