#include "conflict_radar/demo.hpp"

#include "conflict_radar/agent_runner.hpp"
#include "conflict_radar/relay.hpp"
#include "conflict_radar/revision.hpp"

#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <thread>

namespace conflict_radar {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t since(Clock::time_point t0)
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

// Empty when the expectation holds, else what was seen.
std::string check(const std::vector<ConflictReport> &reports, const DemoExpect &e)
{
    for (const ConflictReport &r : reports) {
        if (r.pathId != e.pathId) {
            continue;
        }
        if (e.severity && *e.severity == r.severity) {
            return {};
        }
        return std::string(to_string(r.severity));
    }
    return e.severity ? "no report" : std::string{};
}

std::filesystem::path make_temp_dir()
{
    std::random_device rd;
    for (;;) {
        const auto dir = std::filesystem::temp_directory_path() /
                         ("conflict-radar-demo-" + std::to_string(rd()));
        if (std::filesystem::create_directory(dir)) {
            return dir;
        }
    }
}

} // namespace

DemoScript parse_demo_script(const Json &doc)
{
    DemoScript s;
    s.project = doc.value("project", s.project);
    s.debounceMillis = doc.value("debounceMillis", s.debounceMillis);
    s.timeoutMillis = doc.value("timeoutMillis", s.timeoutMillis);
    if (doc.contains("files")) {
        for (const auto &[path, content] : doc.at("files").items()) {
            s.files[path] = content.get<std::string>();
        }
    }
    for (const Json &m : doc.at("members")) {
        s.members.push_back(DemoMember{m.at("name").get<std::string>(), m.value("revision", std::uint64_t{1})});
    }
    for (const Json &j : doc.at("steps")) {
        DemoStep step;
        step.member = j.at("member").get<std::string>();
        step.delayMillis = j.value("delayMillis", 0);
        step.filePath = j.at("filePath").get<std::string>();
        if (j.contains("newContent") && !j.at("newContent").is_null()) {
            step.newContent = j.at("newContent").get<std::string>();
        }
        step.expectRejected = j.value("expectRejected", false);
        step.note = j.value("note", std::string{});
        for (const Json &e : j.value("expect", Json::array())) {
            DemoExpect x;
            x.member = e.at("member").get<std::string>();
            x.pathId = e.at("pathId").get<std::string>();
            if (e.contains("severity") && !e.at("severity").is_null()) {
                x.severity = severity_from_string(e.at("severity").get<std::string>());
                if (!x.severity) {
                    throw std::invalid_argument("unknown severity in demo script");
                }
            }
            step.expect.push_back(std::move(x));
        }
        s.steps.push_back(std::move(step));
    }
    return s;
}

DemoScript load_demo_script(const std::string &path)
{
    const auto text = read_file(path);
    if (!text) {
        throw std::runtime_error("cannot read " + path);
    }
    return parse_demo_script(Json::parse(*text));
}

DemoResult run_demo(const DemoScript &script, std::ostream &out, bool verbose)
{
    DemoResult result;
    std::mutex outMutex;
    const Clock::time_point t0 = Clock::now();
    auto line = [&](const std::string &who, const std::string &text) {
        std::lock_guard lk(outMutex);
        out << "+" << std::setw(5) << since(t0) << "ms  " << std::left << std::setw(8) << who << std::right
            << " " << text << "\n";
        out.flush();
    };

    RelayOptions ro;
    ro.port = 0;
    ro.http = false;
    ro.sessionId = "demo";
    RelayServer server(ro);
    server.start();

    const std::filesystem::path tmp = make_temp_dir();
    std::map<std::string, std::unique_ptr<AgentRunner>> runners;
    for (const DemoMember &m : script.members) {
        const auto root = tmp / m.name;
        for (const auto &[path, content] : script.files) {
            write_file(root / path, content);
        }
        FileRevisionProvider::write_revision(root, RevisionStamp{m.revision});
        WorkspaceConfig c;
        c.project = script.project;
        c.root = root;
        c.author = m.name;
        c.server = "127.0.0.1:" + std::to_string(server.port());
        c.debounceMillis = script.debounceMillis;
        RunnerOptions opts;
        opts.watch = false;
        opts.backoff = Backoff{std::chrono::milliseconds(20), std::chrono::milliseconds(200)};
        auto log = verbose ? AgentRunner::Log([&line, name = m.name](const std::string &t) { line(name, t); })
                           : AgentRunner::Log{};
        runners[m.name] = std::make_unique<AgentRunner>(c, log, opts);
    }
    // Members join in script order, so the session revision is settled
    // before anyone edits.
    for (const DemoMember &m : script.members) {
        runners[m.name]->start();
        const auto until = Clock::now() + std::chrono::milliseconds(script.timeoutMillis);
        while (!runners[m.name]->connected() && Clock::now() < until) {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        if (!runners[m.name]->connected()) {
            result.failure = "member " + m.name + " could not connect";
        }
        line(m.name, "joined at revision " + std::to_string(m.revision));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));

    for (std::size_t i = 0; i < script.steps.size() && result.failure.empty(); ++i) {
        const DemoStep &step = script.steps[i];
        const std::string label = "step " + std::to_string(i + 1) + (step.note.empty() ? "" : " (" + step.note + ")");
        const auto runner = runners.find(step.member);
        if (runner == runners.end()) {
            result.failure = label + ": unknown member " + step.member;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(step.delayMillis));
        const std::uint64_t rejectedBefore = runner->second->counters().rejected;
        const auto root = tmp / step.member;
        if (step.newContent) {
            write_file(root / step.filePath, *step.newContent);
        } else {
            std::filesystem::remove(root / step.filePath);
        }
        const Clock::time_point written = Clock::now();
        runner->second->touch({step.filePath});
        line(step.member, (step.newContent ? "saves " : "deletes ") + step.filePath +
                              (step.note.empty() ? "" : "  # " + step.note));

        const auto until = written + std::chrono::milliseconds(script.timeoutMillis);
        std::string why;
        for (;;) {
            why.clear();
            if (step.expectRejected && runner->second->counters().rejected == rejectedBefore) {
                why = step.member + " was not rejected";
            }
            for (const DemoExpect &e : step.expect) {
                const auto r = runners.find(e.member);
                if (r == runners.end()) {
                    why = "unknown member " + e.member;
                    break;
                }
                const std::string seen = check(r->second->reports(), e);
                if (!seen.empty()) {
                    why = e.member + " expected " +
                          (e.severity ? std::string(to_string(*e.severity)) : std::string("nothing")) + " on " +
                          e.pathId + ", saw " + seen;
                    break;
                }
            }
            if (why.empty() || Clock::now() >= until) {
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        const std::int64_t latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - written).count();
        result.latencies.push_back(latency);
        // Negative expectations need time to be meaningful: wait for the
        // step to quiesce and check again.
        if (why.empty()) {
            for (auto &[name, r] : runners) {
                r->settle(std::chrono::milliseconds(script.timeoutMillis));
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(script.debounceMillis + 50));
            for (const DemoExpect &e : step.expect) {
                const std::string seen = check(runners[e.member]->reports(), e);
                if (!seen.empty()) {
                    why = e.member + " expected " +
                          (e.severity ? std::string(to_string(*e.severity)) : std::string("nothing")) + " on " +
                          e.pathId + ", saw " + seen;
                    break;
                }
            }
        }
        if (!why.empty()) {
            result.failure = label + ": " + why;
            break;
        }
        if (step.expectRejected) {
            line(step.member, "publish rejected as stale");
        }
        for (const DemoExpect &e : step.expect) {
            line(e.member, (e.severity ? std::string(e.severity == Severity::Conflict ? "CONFLICT  " : "awareness ")
                                       : std::string("clear     ")) +
                               e.pathId);
        }
    }

    for (auto &[name, r] : runners) {
        r->stop();
    }
    server.stop();
    std::error_code ec;
    std::filesystem::remove_all(tmp, ec);

    result.ok = result.failure.empty();
    line("demo", result.ok ? "all steps passed" : "FAILED " + result.failure);
    return result;
}

} // namespace conflict_radar
