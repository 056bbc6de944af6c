#pragma once

#include "conflict_radar/distill.hpp"
#include "conflict_radar/model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace conflict_radar {

enum class GateDecision { Accepted, Rejected };

// Incoming change sets based on an older revision than ours are rejected;
// equal and newer ones are accepted.
GateDecision version_gate(const ChangeSet &incoming, RevisionStamp localBase);

// Per-author rename aliases, applied repeatedly so that a parameter renamed
// inside a renamed method still resolves to its base path.
class AliasResolver {
public:
    explicit AliasResolver(const std::vector<RenameAlias> &aliases);

    SemanticPath resolve(const std::string &author, const SemanticPath &path) const;

private:
    std::map<std::string, std::map<SemanticPath, SemanticPath>> byAuthor_;
};

struct IndexedChange {
    std::string author;
    const SemanticChange *change = nullptr;
};

// Alias-resolved path -> changes touching it.
class PathIndex {
public:
    PathIndex() = default;
    PathIndex(const std::vector<const ChangeSet *> &sets, const AliasResolver &resolver);

    void insert(const SemanticPath &resolved, IndexedChange entry);
    const std::vector<IndexedChange> *find(const SemanticPath &resolved) const;
    const auto &entries() const { return entries_; }

private:
    std::unordered_map<SemanticPath, std::vector<IndexedChange>, SemanticPathHash> entries_;
};

// Returns where to decorate a path in the local file version, if known.
using SpanLocator =
    std::function<std::optional<Span>(const SemanticPath &, const std::set<ChangeKind> &)>;

struct DetectOptions {
    // Report concurrent edits that produced identical results as Awareness.
    bool suppressIdentical = false;
    SpanLocator locator;
};

// One report per path changed by at least one remote author: Conflict when the
// local set changed the same path, Awareness otherwise. Sorted by path id.
std::vector<ConflictReport> detect(const ChangeSet &local, const std::vector<ChangeSet> &remotes,
                                   const std::vector<RenameAlias> &aliases,
                                   const DetectOptions &options = {});

ChangeSet purge_on_revert(const ChangeSet &changes, const std::string &filePath);

} // namespace conflict_radar
