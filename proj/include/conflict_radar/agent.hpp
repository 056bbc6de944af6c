#pragma once

#include "conflict_radar/detect.hpp"
#include "conflict_radar/distill.hpp"
#include "conflict_radar/syntax.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace conflict_radar {

enum class BurstOutcome {
    Published, // `delta` should be sent
    Held,      // some touched file does not parse; nothing leaves the workspace
    Idle,      // parsed fine, nothing new to say
};

struct BurstResult {
    BurstOutcome outcome = BurstOutcome::Idle;
    std::optional<ChangeSet> delta;
    // Files restored to their base-revision bytes; each needs a REVERT.
    std::vector<std::string> reverted;
    // Held: file -> "line:col: message".
    std::map<std::string, std::string> errors;
};

// Everything a workspace agent decides, without touching files or sockets.
// Paths are relative to the workspace root, '/'-separated.
class WorkspaceAgent {
public:
    WorkspaceAgent(std::string project, std::string author);

    // Starts over from a base revision. The next burst publishes even when
    // it carries no change, so peers learn about the new base.
    void reset(RevisionStamp base, const std::map<std::string, std::string> &baseline);

    // Contents of files that changed since the last burst; nullopt means
    // deleted. Files stay touched until a burst in which all of them parse.
    BurstResult on_burst(const std::map<std::string, std::optional<std::string>> &files,
                         std::int64_t atMillis);

    const ChangeSet &local() const { return local_; }
    RevisionStamp base() const { return base_; }
    const std::string &author() const { return author_; }
    const std::string &project() const { return project_; }
    const std::set<std::string> &held() const { return touched_; }

    // Where to decorate a base-revision path in the current file, if the
    // element (or its nearest enclosing element) is there.
    std::optional<Span> locate(const SemanticPath &path, const std::set<ChangeKind> &kinds) const;

private:
    std::string project_;
    std::string author_;
    RevisionStamp base_;
    std::map<std::string, std::optional<std::string>> baseline_;
    std::map<std::string, ElementTree> published_; // last published tree per file
    std::map<std::string, std::optional<std::string>> current_;
    std::set<std::string> touched_;
    PathJournal journal_;
    ChangeSet local_;
    std::uint64_t lastFolded_ = 0;
    std::uint64_t nextSeq_ = 1;
    bool announce_ = true;
};

// Span of the attribute a report is about: the body for body changes, the
// name for renames, the parameter for parameter paths, else the element name.
std::optional<Span> attribute_span(const ElementTree &tree, const SemanticPath &path,
                                   const std::set<ChangeKind> &kinds);

} // namespace conflict_radar
