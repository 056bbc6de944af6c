#pragma once

// Canonical JSON encodings. Keys are emitted in sorted order and documents are
// dumped on a single line, so two equal values always encode to equal bytes.

#include "conflict_radar/model.hpp"
#include "conflict_radar/syntax.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace conflict_radar {

using Json = nlohmann::json;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string canonical(const Json &doc);
std::string fingerprint_hex(std::uint64_t fingerprint);
std::uint64_t fingerprint_from_hex(const std::string &text);

Json encode(const Span &span);
Json encode(const ElementTree &tree);
Json encode(const SemanticPath &path);
Json encode(const SemanticChange &change);
Json encode(const ChangeSet &set);
Json encode(const ConflictReport &report);
Json encode(const std::vector<ConflictReport> &reports);

// Decoders throw DecodeError on missing or mistyped fields; unknown fields are
// ignored.
Span decode_span(const Json &doc);
SemanticPath decode_path(const Json &doc);
SemanticChange decode_change(const Json &doc);
ChangeSet decode_change_set(const Json &doc);
ConflictReport decode_report(const Json &doc);

} // namespace conflict_radar
