#pragma once

// Newline-delimited wire messages shared by the relay, workspace clients and
// the dashboard feed. Field names are listed in protocol.md.

#include "conflict_radar/codec.hpp"
#include "conflict_radar/model.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conflict_radar {

enum class MessageType {
    Hello,
    Welcome,
    Publish,
    Broadcast,
    Revert,
    Bye,
    Conflicts,
    Reject, // stale PUBLISH, sent to its author only
    Error,  // protocol violation; the connection is closed after it
};

std::string_view to_string(MessageType type);
std::optional<MessageType> message_type_from_string(std::string_view text);

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WireMessage {
    MessageType type = MessageType::Hello;

    std::string author;        // HELLO BROADCAST REVERT BYE REJECT
    std::string project;       // HELLO
    RevisionStamp baseRevision; // HELLO REJECT (the rejected set's base)
    RevisionStamp sessionRevision; // WELCOME REJECT

    std::string sessionId;          // WELCOME
    std::vector<ChangeSet> snapshot; // WELCOME
    std::map<std::string, std::uint64_t> lastSeqs; // WELCOME, per author
    std::optional<ChangeSet> delta;  // PUBLISH BROADCAST
    std::string filePath;            // REVERT
    std::map<std::string, std::vector<ConflictReport>> conflicts; // CONFLICTS
    std::string reason;              // REJECT ERROR

    friend bool operator==(const WireMessage &, const WireMessage &) = default;
};

Json encode(const WireMessage &message);

// One line of canonical JSON, without the trailing newline.
std::string encode_line(const WireMessage &message);

// Throws ProtocolError on malformed JSON or a known type with a bad payload.
// Returns nullopt for message types this build does not know.
std::optional<WireMessage> decode_line(std::string_view line);

WireMessage hello(const std::string &author, const std::string &project, RevisionStamp base);
WireMessage publish(ChangeSet delta);
WireMessage revert(const std::string &author, const std::string &filePath);

// Folds a delta into a stored per-author set. Changes at or below `lastSeq`
// were already folded and are skipped; a delta on a newer base revision
// replaces the stored set. Returns false when nothing changed.
bool fold_delta(ChangeSet &stored, std::uint64_t &lastSeq, const ChangeSet &delta);

} // namespace conflict_radar
