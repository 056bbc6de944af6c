#pragma once

#include "conflict_radar/detect.hpp"
#include "conflict_radar/protocol.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace conflict_radar {

// A member's picture of everyone else's change sets.
class RemoteView {
public:
    explicit RemoteView(std::string self = {}) : self_(std::move(self)) {}

    void set_self(std::string self) { self_ = std::move(self); }
    // Also forgets remote sets on an older base than the new one.
    void set_local_base(RevisionStamp base);
    RevisionStamp local_base() const { return localBase_; }

    // Applies WELCOME, BROADCAST, REVERT or BYE. Returns true when a remote
    // set changed. Broadcasts on an older base than ours are dropped, the
    // same rule the relay applies.
    bool apply(const WireMessage &message);

    std::vector<ChangeSet> remotes() const;
    const std::map<std::string, ChangeSet> &sets() const { return sets_; }
    std::vector<RenameAlias> aliases(const ChangeSet &local) const;

    std::uint64_t dropped_stale() const { return droppedStale_; }

private:
    std::string self_;
    RevisionStamp localBase_;
    std::map<std::string, ChangeSet> sets_;
    std::map<std::string, std::uint64_t> lastSeq_;
    std::uint64_t droppedStale_ = 0;
};

// Detection against the current view, with aliases from every set.
std::vector<ConflictReport> client_detect(const ChangeSet &local, const RemoteView &view,
                                          const DetectOptions &options = {});

struct ReportDiff {
    std::vector<ConflictReport> added;
    std::vector<ConflictReport> removed;
    std::vector<ConflictReport> changed; // same path, new content
    bool empty() const { return added.empty() && removed.empty() && changed.empty(); }
};

ReportDiff diff_reports(const std::vector<ConflictReport> &before,
                        const std::vector<ConflictReport> &after);

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7341;
};

// "host:port", ":port" or "host"; missing parts keep their defaults.
Endpoint parse_endpoint(const std::string &text);

struct Backoff {
    std::chrono::milliseconds base{250};
    std::chrono::milliseconds cap{8000};

    std::chrono::milliseconds delay(int attempt) const;
};

// Line-oriented TCP client that reconnects with exponential backoff. On every
// (re)connect `greeting` supplies the first messages to send. Sends while
// disconnected are dropped; the greeting restates full state.
class RelayClient {
public:
    using Greeting = std::function<std::vector<WireMessage>()>;
    using Handler = std::function<void(const WireMessage &)>;
    using StatusHandler = std::function<void(bool connected, const std::string &detail)>;

    RelayClient(Endpoint endpoint, Greeting greeting, Handler handler, StatusHandler status = {},
                Backoff backoff = {});
    ~RelayClient();
    RelayClient(const RelayClient &) = delete;
    RelayClient &operator=(const RelayClient &) = delete;

    void start();
    // Sends BYE when connected, then closes.
    void stop();
    // Returns false when not connected.
    bool send(const WireMessage &message);
    bool connected() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace conflict_radar
