#include "conflict_radar/detect.hpp"

#include <algorithm>
#include <tuple>

namespace conflict_radar {

namespace {

constexpr int kMaxAliasHops = 8;

// Value a change leaves its attribute in; identical on both sides means the
// two edits agree.
auto outcome(const SemanticChange &c)
{
    return std::tie(c.kind, c.newValue, c.newFingerprint);
}

bool identical_outcomes(const std::vector<IndexedChange> &local,
                        const std::vector<IndexedChange> &remote)
{
    auto covered = [](const std::vector<IndexedChange> &from,
                      const std::vector<IndexedChange> &in) {
        return std::all_of(from.begin(), from.end(), [&](const IndexedChange &x) {
            return std::any_of(in.begin(), in.end(), [&](const IndexedChange &y) {
                return outcome(*x.change) == outcome(*y.change);
            });
        });
    };
    return covered(local, remote) && covered(remote, local);
}

} // namespace

GateDecision version_gate(const ChangeSet &incoming, RevisionStamp localBase)
{
    return incoming.baseRevision < localBase ? GateDecision::Rejected : GateDecision::Accepted;
}

AliasResolver::AliasResolver(const std::vector<RenameAlias> &aliases)
{
    for (const RenameAlias &a : aliases) {
        byAuthor_[a.author][a.newPath] = a.oldPath;
    }
}

SemanticPath AliasResolver::resolve(const std::string &author, const SemanticPath &path) const
{
    const auto table = byAuthor_.find(author);
    if (table == byAuthor_.end()) {
        return path;
    }
    SemanticPath current = path;
    for (int hop = 0; hop < kMaxAliasHops; ++hop) {
        bool moved = false;
        for (const SemanticPath &ancestor : lineage(current)) {
            if (const auto it = table->second.find(ancestor); it != table->second.end()) {
                current = rebase(current, ancestor, it->second);
                moved = true;
                break;
            }
        }
        if (!moved) {
            break;
        }
    }
    return current;
}

PathIndex::PathIndex(const std::vector<const ChangeSet *> &sets, const AliasResolver &resolver)
{
    for (const ChangeSet *set : sets) {
        for (const SemanticChange &c : set->changes) {
            insert(resolver.resolve(c.author, c.path), IndexedChange{c.author, &c});
        }
    }
}

void PathIndex::insert(const SemanticPath &resolved, IndexedChange entry)
{
    entries_[resolved].push_back(std::move(entry));
}

const std::vector<IndexedChange> *PathIndex::find(const SemanticPath &resolved) const
{
    const auto it = entries_.find(resolved);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<ConflictReport> detect(const ChangeSet &local, const std::vector<ChangeSet> &remotes,
                                   const std::vector<RenameAlias> &aliases,
                                   const DetectOptions &options)
{
    const AliasResolver resolver(aliases);
    const PathIndex localIndex({&local}, resolver);
    std::vector<const ChangeSet *> remotePtrs;
    remotePtrs.reserve(remotes.size());
    for (const ChangeSet &r : remotes) {
        remotePtrs.push_back(&r);
    }
    const PathIndex remoteIndex(remotePtrs, resolver);

    std::vector<ConflictReport> reports;
    reports.reserve(remoteIndex.entries().size());
    for (const auto &[path, remoteChanges] : remoteIndex.entries()) {
        ConflictReport r;
        r.path = path;
        r.pathId = render_path_id(path);
        for (const IndexedChange &e : remoteChanges) {
            r.remoteAuthors.insert(e.author);
            r.remoteKinds.insert(e.change->kind);
        }
        const SemanticChange *spanSource = remoteChanges.back().change;
        if (const auto *localChanges = localIndex.find(path)) {
            r.severity = Severity::Conflict;
            for (const IndexedChange &e : *localChanges) {
                r.localKinds.insert(e.change->kind);
            }
            spanSource = localChanges->back().change;
            if (options.suppressIdentical && identical_outcomes(*localChanges, remoteChanges)) {
                r.severity = Severity::Awareness;
                r.localKinds.clear();
            }
        }
        r.decorationSpan = spanSource->decorationSpan;
        if (options.locator) {
            std::set<ChangeKind> kinds = r.remoteKinds;
            kinds.insert(r.localKinds.begin(), r.localKinds.end());
            if (const auto located = options.locator(path, kinds)) {
                r.decorationSpan = *located;
            }
        }
        reports.push_back(std::move(r));
    }
    std::sort(reports.begin(), reports.end(), [](const ConflictReport &x, const ConflictReport &y) {
        return std::tie(x.pathId, x.path) < std::tie(y.pathId, y.path);
    });
    return reports;
}

ChangeSet purge_on_revert(const ChangeSet &changes, const std::string &filePath)
{
    ChangeSet out = changes;
    std::erase_if(out.changes,
                  [&](const SemanticChange &c) { return c.path.file == filePath; });
    return out;
}

} // namespace conflict_radar
