#pragma once

#include "conflict_radar/agent.hpp"
#include "conflict_radar/client.hpp"
#include "conflict_radar/config.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace conflict_radar {

struct RunnerCounters {
    std::uint64_t bursts = 0;
    std::uint64_t published = 0;
    std::uint64_t held = 0;
    std::uint64_t reverts = 0;
    std::uint64_t rejected = 0;
    std::uint64_t rebases = 0;
};

struct RunnerOptions {
    // Checks for a new base revision this often, besides before each burst.
    std::chrono::milliseconds revisionPoll{1000};
    // Watch the file system. Off means bursts only come from touch().
    bool watch = true;
    Backoff backoff{};
};

// Drives a WorkspaceAgent: file events are debounced into bursts, deltas go
// to the relay, remote traffic feeds detection, reports land in
// <root>/.conflict-radar/reports.json. All agent state lives on one
// coordinator thread.
class AgentRunner {
public:
    using Log = std::function<void(const std::string &)>;
    // Every message handed to the relay client, before sending.
    using SendHook = std::function<void(const WireMessage &)>;

    AgentRunner(WorkspaceConfig config, Log log = {}, RunnerOptions options = {});
    ~AgentRunner();
    AgentRunner(const AgentRunner &) = delete;
    AgentRunner &operator=(const AgentRunner &) = delete;

    void set_send_hook(SendHook hook);

    void start();
    void stop();

    // Queues the given relative paths as changed, as if the watcher saw them.
    void touch(const std::vector<std::string> &paths);
    // Waits until no event is queued and no burst is pending.
    bool settle(std::chrono::milliseconds timeout);

    std::vector<ConflictReport> reports() const;
    ChangeSet local() const;
    RevisionStamp base() const;
    std::string status() const;
    RunnerCounters counters() const;
    bool connected() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Human-readable line for a report transition.
std::string describe_report(const ConflictReport &report);

} // namespace conflict_radar
