#pragma once

#include "conflict_radar/detect.hpp"
#include "conflict_radar/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace conflict_radar {

using ClientId = std::uint64_t;

enum class ClientRole {
    Member,   // workspace agent: HELLO, PUBLISH, REVERT
    Observer, // dashboard: receives everything, sends nothing that changes state
};

struct Outgoing {
    ClientId to = 0;
    WireMessage message;
    bool close = false; // close the connection after sending
};

// The relay's session state, free of I/O. Every call returns the messages to
// deliver; the transport must apply calls one at a time.
class RelaySession {
public:
    explicit RelaySession(std::string sessionId = "session");

    // Observers are greeted immediately; members after their HELLO.
    std::vector<Outgoing> connect(ClientId id, ClientRole role);
    std::vector<Outgoing> receive(ClientId from, const WireMessage &message);
    std::vector<Outgoing> malformed(ClientId from, const std::string &reason);
    std::vector<Outgoing> disconnect(ClientId id);

    const std::string &session_id() const { return sessionId_; }
    RevisionStamp highest_revision() const { return highest_; }
    // Stored consolidated sets, ordered by author.
    std::vector<ChangeSet> snapshot() const;
    // Reports each member would compute locally, for the dashboard feed.
    std::map<std::string, std::vector<ConflictReport>> conflicts() const;

private:
    struct Client {
        ClientRole role = ClientRole::Member;
        std::string author; // empty until HELLO
    };

    std::vector<Outgoing> on_hello(ClientId from, const WireMessage &m);
    std::vector<Outgoing> on_publish(ClientId from, const ChangeSet &delta);
    std::vector<Outgoing> on_revert(ClientId from, const std::string &filePath);
    WireMessage welcome() const;
    void fan_out(std::vector<Outgoing> &out, ClientId except, const WireMessage &m) const;
    void feed(std::vector<Outgoing> &out) const;
    std::vector<Outgoing> fail(ClientId to, const std::string &reason);

    std::string sessionId_;
    RevisionStamp highest_;
    std::map<ClientId, Client> clients_;
    std::map<std::string, ChangeSet> stored_;
    std::map<std::string, std::uint64_t> lastSeq_;
};

struct RelayOptions {
    std::string host = "127.0.0.1";
    // 0 picks free ports; otherwise the WebSocket/HTTP endpoint is port + 1.
    std::uint16_t port = 7341;
    bool http = true;
    std::filesystem::path dashboardDir; // static files, served when set
    std::string sessionId = "session";
};

// TCP (newline-delimited JSON) and WebSocket front end for a RelaySession.
// All session calls run on one I/O thread.
class RelayServer {
public:
    explicit RelayServer(RelayOptions options);
    ~RelayServer();
    RelayServer(const RelayServer &) = delete;
    RelayServer &operator=(const RelayServer &) = delete;

    void start();
    void stop();
    // Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t port() const;
    std::uint16_t http_port() const;

    // Entries POSTed to /actions, oldest first.
    std::vector<Json> actions() const;
    std::vector<ChangeSet> snapshot() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace conflict_radar
