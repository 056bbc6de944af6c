#include "conflict_radar/codec.hpp"

#include <charconv>
#include <cstdio>

namespace conflict_radar {

namespace {

template <typename Fn>
auto guarded(const char *what, Fn &&fn)
{
    try {
        return fn();
    } catch (const Json::exception &e) {
        throw DecodeError(std::string("malformed ") + what + ": " + e.what());
    }
}

Json encode_optional_span(const std::optional<Span> &span)
{
    return span ? encode(*span) : Json(nullptr);
}

Json encode_modifiers(const std::set<std::string> &mods)
{
    Json arr = Json::array();
    for (const std::string &m : mods) {
        arr.push_back(m);
    }
    return arr;
}

Json encode_class(const ClassDecl &cls)
{
    Json fields = Json::array();
    for (const FieldDecl &f : cls.fields) {
        fields.push_back({
            {"access", to_string(f.access)},
            {"accessSpan", encode_optional_span(f.accessSpan)},
            {"modifiers", encode_modifiers(f.modifiers)},
            {"modifierSpan", encode_optional_span(f.modifierSpan)},
            {"type", f.type},
            {"typeSpan", encode(f.typeSpan)},
            {"name", f.name},
            {"nameSpan", encode(f.nameSpan)},
            {"initializer", f.initializer ? Json(*f.initializer) : Json(nullptr)},
            {"initializerSpan", encode_optional_span(f.initializerSpan)},
            {"span", encode(f.span)},
        });
    }
    Json methods = Json::array();
    for (const MethodDecl &m : cls.methods) {
        Json params = Json::array();
        for (const ParamDecl &p : m.params) {
            params.push_back({
                {"type", p.type},
                {"typeSpan", encode(p.typeSpan)},
                {"name", p.name},
                {"nameSpan", encode(p.nameSpan)},
                {"span", encode(p.span)},
            });
        }
        methods.push_back({
            {"access", to_string(m.access)},
            {"accessSpan", encode_optional_span(m.accessSpan)},
            {"modifiers", encode_modifiers(m.modifiers)},
            {"modifierSpan", encode_optional_span(m.modifierSpan)},
            {"returnType", m.returnType ? Json(*m.returnType) : Json(nullptr)},
            {"returnTypeSpan", encode_optional_span(m.returnTypeSpan)},
            {"name", m.name},
            {"nameSpan", encode(m.nameSpan)},
            {"params", std::move(params)},
            {"paramListSpan", encode(m.paramListSpan)},
            {"bodyFingerprint", fingerprint_hex(m.bodyFingerprint)},
            {"bodySpan", encode_optional_span(m.bodySpan)},
            {"span", encode(m.span)},
        });
    }
    Json nested = Json::array();
    for (const ClassDecl &c : cls.classes) {
        nested.push_back(encode_class(c));
    }
    return {
        {"keyword", cls.keyword},
        {"name", cls.name},
        {"nameSpan", encode(cls.nameSpan)},
        {"modifiers", encode_modifiers(cls.modifiers)},
        {"modifierSpan", encode_optional_span(cls.modifierSpan)},
        {"fields", std::move(fields)},
        {"methods", std::move(methods)},
        {"classes", std::move(nested)},
        {"span", encode(cls.span)},
    };
}

std::optional<std::string> optional_string(const Json &doc, const char *key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    return it->get<std::string>();
}

Json encode_kinds(const std::set<ChangeKind> &kinds)
{
    Json arr = Json::array();
    for (ChangeKind k : kinds) {
        arr.push_back(to_string(k));
    }
    return arr;
}

ChangeKind decode_kind(const Json &doc)
{
    const auto kind = change_kind_from_string(doc.get<std::string>());
    if (!kind) {
        throw DecodeError("unknown change kind '" + doc.get<std::string>() + "'");
    }
    return *kind;
}

} // namespace

std::string canonical(const Json &doc)
{
    return doc.dump();
}

std::string fingerprint_hex(std::uint64_t fingerprint)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
    return buf;
}

std::uint64_t fingerprint_from_hex(const std::string &text)
{
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.size() != 16) {
        throw DecodeError("bad fingerprint '" + text + "'");
    }
    return value;
}

Json encode(const Span &span)
{
    return {
        {"start", span.startByte},   {"end", span.endByte},
        {"startLine", span.startLine}, {"startCol", span.startCol},
        {"endLine", span.endLine},   {"endCol", span.endCol},
    };
}

Json encode(const ElementTree &tree)
{
    Json classes = Json::array();
    for (const ClassDecl &cls : tree.classes) {
        classes.push_back(encode_class(cls));
    }
    return {{"filePath", tree.filePath}, {"classes", std::move(classes)}};
}

Json encode(const SemanticPath &path)
{
    Json doc = {
        {"project", path.project},
        {"file", path.file},
        {"classes", path.classChain},
    };
    if (path.member) {
        Json member = {
            {"kind", path.member->kind == MemberKind::Field ? "field" : "method"},
            {"name", path.member->name},
        };
        if (path.member->kind == MemberKind::Method) {
            member["arity"] = path.member->arity;
        }
        doc["member"] = std::move(member);
    }
    if (path.param) {
        doc["param"] = *path.param;
    }
    return doc;
}

Json encode(const SemanticChange &change)
{
    Json doc = {
        {"kind", to_string(change.kind)},
        {"path", encode(change.path)},
        {"pathId", render_path_id(change.path)},
        {"author", change.author},
        {"baseRevision", change.baseRevision.value},
        {"seq", change.seq},
        {"atMillis", change.atMillis},
        {"span", encode(change.decorationSpan)},
    };
    if (change.oldValue) {
        doc["old"] = *change.oldValue;
    }
    if (change.newValue) {
        doc["new"] = *change.newValue;
    }
    if (change.oldFingerprint) {
        doc["oldFingerprint"] = fingerprint_hex(*change.oldFingerprint);
    }
    if (change.newFingerprint) {
        doc["newFingerprint"] = fingerprint_hex(*change.newFingerprint);
    }
    if (change.newPath) {
        doc["newPath"] = encode(*change.newPath);
    }
    return doc;
}

Json encode(const ChangeSet &set)
{
    Json changes = Json::array();
    for (const SemanticChange &c : set.changes) {
        changes.push_back(encode(c));
    }
    return {
        {"author", set.author},
        {"baseRevision", set.baseRevision.value},
        {"changes", std::move(changes)},
    };
}

Json encode(const ConflictReport &report)
{
    return {
        {"pathId", report.pathId},
        {"path", encode(report.path)},
        {"severity", to_string(report.severity)},
        {"localKinds", encode_kinds(report.localKinds)},
        {"remoteAuthors", report.remoteAuthors},
        {"remoteKinds", encode_kinds(report.remoteKinds)},
        {"span", encode(report.decorationSpan)},
    };
}

Json encode(const std::vector<ConflictReport> &reports)
{
    Json arr = Json::array();
    for (const ConflictReport &r : reports) {
        arr.push_back(encode(r));
    }
    return arr;
}

Span decode_span(const Json &doc)
{
    return guarded("span", [&] {
        return Span{doc.at("start").get<std::size_t>(), doc.at("end").get<std::size_t>(),
                    doc.at("startLine").get<int>(),     doc.at("startCol").get<int>(),
                    doc.at("endLine").get<int>(),       doc.at("endCol").get<int>()};
    });
}

SemanticPath decode_path(const Json &doc)
{
    SemanticPath path = guarded("path", [&] {
        SemanticPath p;
        p.project = doc.at("project").get<std::string>();
        p.file = doc.at("file").get<std::string>();
        p.classChain = doc.at("classes").get<std::vector<std::string>>();
        if (const auto it = doc.find("member"); it != doc.end() && !it->is_null()) {
            MemberRef m;
            const auto kind = it->at("kind").get<std::string>();
            if (kind != "field" && kind != "method") {
                throw DecodeError("unknown member kind '" + kind + "'");
            }
            m.kind = kind == "field" ? MemberKind::Field : MemberKind::Method;
            m.name = it->at("name").get<std::string>();
            if (m.kind == MemberKind::Method) {
                m.arity = it->at("arity").get<std::size_t>();
            }
            p.member = std::move(m);
        }
        p.param = optional_string(doc, "param");
        return p;
    });
    if (!path.well_formed()) {
        throw DecodeError("ill-formed semantic path");
    }
    return path;
}

SemanticChange decode_change(const Json &doc)
{
    return guarded("change", [&] {
        SemanticChange c;
        c.kind = decode_kind(doc.at("kind"));
        c.path = decode_path(doc.at("path"));
        c.oldValue = optional_string(doc, "old");
        c.newValue = optional_string(doc, "new");
        if (const auto fp = optional_string(doc, "oldFingerprint")) {
            c.oldFingerprint = fingerprint_from_hex(*fp);
        }
        if (const auto fp = optional_string(doc, "newFingerprint")) {
            c.newFingerprint = fingerprint_from_hex(*fp);
        }
        c.author = doc.at("author").get<std::string>();
        c.baseRevision.value = doc.at("baseRevision").get<std::uint64_t>();
        c.seq = doc.at("seq").get<std::uint64_t>();
        c.atMillis = doc.at("atMillis").get<std::int64_t>();
        c.decorationSpan = decode_span(doc.at("span"));
        if (const auto it = doc.find("newPath"); it != doc.end() && !it->is_null()) {
            c.newPath = decode_path(*it);
        }
        return c;
    });
}

ChangeSet decode_change_set(const Json &doc)
{
    return guarded("change set", [&] {
        ChangeSet set;
        set.author = doc.at("author").get<std::string>();
        set.baseRevision.value = doc.at("baseRevision").get<std::uint64_t>();
        for (const Json &c : doc.at("changes")) {
            set.changes.push_back(decode_change(c));
        }
        return set;
    });
}

ConflictReport decode_report(const Json &doc)
{
    return guarded("report", [&] {
        ConflictReport r;
        r.pathId = doc.at("pathId").get<std::string>();
        r.path = decode_path(doc.at("path"));
        const auto severity = severity_from_string(doc.at("severity").get<std::string>());
        if (!severity) {
            throw DecodeError("unknown severity");
        }
        r.severity = *severity;
        for (const Json &k : doc.at("localKinds")) {
            r.localKinds.insert(decode_kind(k));
        }
        r.remoteAuthors = doc.at("remoteAuthors").get<std::set<std::string>>();
        for (const Json &k : doc.at("remoteKinds")) {
            r.remoteKinds.insert(decode_kind(k));
        }
        r.decorationSpan = decode_span(doc.at("span"));
        return r;
    });
}

} // namespace conflict_radar
