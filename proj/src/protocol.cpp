#include "conflict_radar/protocol.hpp"

#include "conflict_radar/distill.hpp"

#include <array>
#include <utility>

namespace conflict_radar {

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 9> kTypeNames = {{
    {MessageType::Hello, "HELLO"},
    {MessageType::Welcome, "WELCOME"},
    {MessageType::Publish, "PUBLISH"},
    {MessageType::Broadcast, "BROADCAST"},
    {MessageType::Revert, "REVERT"},
    {MessageType::Bye, "BYE"},
    {MessageType::Conflicts, "CONFLICTS"},
    {MessageType::Reject, "REJECT"},
    {MessageType::Error, "ERROR"},
}};

std::string text(const Json &doc, const char *key)
{
    return doc.at(key).get<std::string>();
}

RevisionStamp stamp(const Json &doc, const char *key)
{
    return RevisionStamp{doc.at(key).get<std::uint64_t>()};
}

} // namespace

std::string_view to_string(MessageType type)
{
    for (const auto &[t, name] : kTypeNames) {
        if (t == type) {
            return name;
        }
    }
    return "?";
}

std::optional<MessageType> message_type_from_string(std::string_view text)
{
    for (const auto &[t, name] : kTypeNames) {
        if (name == text) {
            return t;
        }
    }
    return std::nullopt;
}

Json encode(const WireMessage &m)
{
    Json doc = {{"type", to_string(m.type)}};
    switch (m.type) {
    case MessageType::Hello:
        doc["author"] = m.author;
        doc["project"] = m.project;
        doc["baseRevision"] = m.baseRevision.value;
        break;
    case MessageType::Welcome: {
        Json sets = Json::array();
        for (const ChangeSet &s : m.snapshot) {
            sets.push_back(encode(s));
        }
        doc["sessionId"] = m.sessionId;
        doc["sessionRevision"] = m.sessionRevision.value;
        doc["snapshot"] = std::move(sets);
        doc["lastSeqs"] = m.lastSeqs;
        break;
    }
    case MessageType::Publish:
        doc["changeSetDelta"] = encode(m.delta.value_or(ChangeSet{}));
        break;
    case MessageType::Broadcast:
        doc["author"] = m.author;
        doc["changeSetDelta"] = encode(m.delta.value_or(ChangeSet{}));
        break;
    case MessageType::Revert:
        doc["author"] = m.author;
        doc["filePath"] = m.filePath;
        break;
    case MessageType::Bye:
        doc["author"] = m.author;
        break;
    case MessageType::Conflicts: {
        Json members = Json::object();
        for (const auto &[member, reports] : m.conflicts) {
            members[member] = encode(reports);
        }
        doc["members"] = std::move(members);
        break;
    }
    case MessageType::Reject:
        doc["author"] = m.author;
        doc["baseRevision"] = m.baseRevision.value;
        doc["sessionRevision"] = m.sessionRevision.value;
        doc["reason"] = m.reason;
        break;
    case MessageType::Error:
        doc["reason"] = m.reason;
        break;
    }
    return doc;
}

std::string encode_line(const WireMessage &message)
{
    return canonical(encode(message));
}

std::optional<WireMessage> decode_line(std::string_view line)
{
    Json doc;
    try {
        doc = Json::parse(line);
    } catch (const Json::parse_error &e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
        throw ProtocolError("message has no type");
    }
    const auto type = message_type_from_string(doc["type"].get<std::string>());
    if (!type) {
        return std::nullopt;
    }
    WireMessage m;
    m.type = *type;
    try {
        switch (m.type) {
        case MessageType::Hello:
            m.author = text(doc, "author");
            m.project = text(doc, "project");
            m.baseRevision = stamp(doc, "baseRevision");
            if (m.author.empty()) {
                throw ProtocolError("HELLO without author");
            }
            break;
        case MessageType::Welcome:
            m.sessionId = text(doc, "sessionId");
            m.sessionRevision = stamp(doc, "sessionRevision");
            for (const Json &s : doc.at("snapshot")) {
                m.snapshot.push_back(decode_change_set(s));
            }
            if (const auto it = doc.find("lastSeqs"); it != doc.end()) {
                m.lastSeqs = it->get<std::map<std::string, std::uint64_t>>();
            }
            break;
        case MessageType::Publish:
            m.delta = decode_change_set(doc.at("changeSetDelta"));
            break;
        case MessageType::Broadcast:
            m.author = text(doc, "author");
            m.delta = decode_change_set(doc.at("changeSetDelta"));
            break;
        case MessageType::Revert:
            m.author = text(doc, "author");
            m.filePath = text(doc, "filePath");
            break;
        case MessageType::Bye:
            m.author = text(doc, "author");
            break;
        case MessageType::Conflicts:
            for (const auto &[member, reports] : doc.at("members").items()) {
                auto &out = m.conflicts[member];
                for (const Json &r : reports) {
                    out.push_back(decode_report(r));
                }
            }
            break;
        case MessageType::Reject:
            m.author = text(doc, "author");
            m.baseRevision = stamp(doc, "baseRevision");
            m.sessionRevision = stamp(doc, "sessionRevision");
            m.reason = text(doc, "reason");
            break;
        case MessageType::Error:
            m.reason = text(doc, "reason");
            break;
        }
    } catch (const Json::exception &e) {
        throw ProtocolError(std::string(to_string(m.type)) + ": " + e.what());
    } catch (const DecodeError &e) {
        throw ProtocolError(std::string(to_string(m.type)) + ": " + e.what());
    }
    return m;
}

WireMessage hello(const std::string &author, const std::string &project, RevisionStamp base)
{
    WireMessage m;
    m.type = MessageType::Hello;
    m.author = author;
    m.project = project;
    m.baseRevision = base;
    return m;
}

WireMessage publish(ChangeSet delta)
{
    WireMessage m;
    m.type = MessageType::Publish;
    m.delta = std::move(delta);
    return m;
}

WireMessage revert(const std::string &author, const std::string &filePath)
{
    WireMessage m;
    m.type = MessageType::Revert;
    m.author = author;
    m.filePath = filePath;
    return m;
}

bool fold_delta(ChangeSet &stored, std::uint64_t &lastSeq, const ChangeSet &delta)
{
    bool changed = false;
    if (stored.author.empty()) {
        stored.author = delta.author;
        stored.baseRevision = delta.baseRevision;
    }
    if (delta.baseRevision < stored.baseRevision) {
        return false;
    }
    if (stored.baseRevision < delta.baseRevision) {
        stored.changes.clear();
        stored.baseRevision = delta.baseRevision;
        changed = true;
    }
    ChangeSet merged = stored;
    std::uint64_t last = lastSeq;
    for (const SemanticChange &c : delta.changes) {
        if (c.seq > last) {
            merged.changes.push_back(c);
            last = c.seq;
        }
    }
    if (last == lastSeq) {
        return changed;
    }
    lastSeq = last;
    stored = consolidate(merged);
    return true;
}

} // namespace conflict_radar
