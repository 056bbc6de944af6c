#include "conflict_radar/agent_runner.hpp"
#include "conflict_radar/codec.hpp"
#include "conflict_radar/demo.hpp"
#include "conflict_radar/relay.hpp"
#include "conflict_radar/revision.hpp"

#include <gtest/gtest.h>

#include <mutex>
#include <random>
#include <sstream>
#include <thread>

using namespace conflict_radar;
namespace fs = std::filesystem;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kZoo = "class Zoo {\n    int aField;\n    void feed(int n) { }\n}\n";

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("cr-run-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Member {
    fs::path root;
    std::mutex m;
    std::vector<WireMessage> sent;
    std::vector<std::string> log;
    std::unique_ptr<AgentRunner> runner;

    Member(const fs::path &base, const std::string &name, std::uint16_t port, std::uint64_t rev,
           bool watch = true, int debounce = 100)
        : root(base / name)
    {
        write_file(root / "Zoo.java", kZoo);
        FileRevisionProvider::write_revision(root, RevisionStamp{rev});
        WorkspaceConfig c;
        c.project = "zoo";
        c.root = root;
        c.author = name;
        c.server = "127.0.0.1:" + std::to_string(port);
        c.debounceMillis = debounce;
        RunnerOptions o;
        o.watch = watch;
        o.revisionPoll = 200ms;
        o.backoff = Backoff{20ms, 100ms};
        runner = std::make_unique<AgentRunner>(c, [this](const std::string &l) {
            std::lock_guard lk(m);
            log.push_back(l);
        }, o);
        runner->set_send_hook([this](const WireMessage &w) {
            std::lock_guard lk(m);
            sent.push_back(w);
        });
    }

    std::size_t publishes()
    {
        std::lock_guard lk(m);
        return static_cast<std::size_t>(std::count_if(sent.begin(), sent.end(), [](const WireMessage &w) {
            return w.type == MessageType::Publish;
        }));
    }

    std::optional<ConflictReport> report(const std::string &pathId)
    {
        for (const ConflictReport &r : runner->reports()) {
            if (r.pathId == pathId) {
                return r;
            }
        }
        return std::nullopt;
    }
};

template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = 3000ms)
{
    const auto until = Clock::now() + timeout;
    while (Clock::now() < until) {
        if (pred()) {
            return true;
        }
        std::this_thread::sleep_for(5ms);
    }
    return pred();
}

RelayOptions ephemeral()
{
    RelayOptions o;
    o.port = 0;
    o.http = false;
    return o;
}

} // namespace

TEST(Runner, SavedRenameReachesThePeer)
{
    TempDir d;
    RelayServer server(ephemeral());
    server.start();
    Member alice(d.path, "alice", server.port(), 1);
    Member bob(d.path, "bob", server.port(), 1);
    alice.runner->start();
    bob.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected() && bob.runner->connected(); }));
    std::this_thread::sleep_for(200ms);

    std::string renamed = kZoo;
    renamed.replace(renamed.find("aField"), 6, "theField");
    const auto t0 = Clock::now();
    write_file(alice.root / "Zoo.java", renamed);
    ASSERT_TRUE(eventually([&] { return bob.report("zoo/Zoo.java/Zoo/aField").has_value(); }));
    const auto latency = Clock::now() - t0;
    EXPECT_LT(latency, 2000ms);
    const auto r = *bob.report("zoo/Zoo.java/Zoo/aField");
    EXPECT_EQ(r.severity, Severity::Awareness);
    EXPECT_EQ(r.remoteKinds, std::set<ChangeKind>{ChangeKind::FieldRenamed});
    // Decorated at the field name in bob's copy.
    EXPECT_EQ(kZoo.substr(r.decorationSpan.startByte, r.decorationSpan.endByte - r.decorationSpan.startByte), "aField");

    // reports.json mirrors the runner.
    ASSERT_TRUE(eventually([&] {
        const auto text = read_file(bob.root / ".conflict-radar" / "reports.json");
        return text && Json::parse(*text).at("reports").size() == 1;
    }));
    const Json doc = Json::parse(*read_file(bob.root / ".conflict-radar" / "reports.json"));
    EXPECT_EQ(doc.at("author"), "bob");
    EXPECT_EQ(decode_report(doc.at("reports").at(0)), r);

    alice.runner->stop();
    bob.runner->stop();
}

TEST(Runner, BrokenSaveIsHeldThenReleased)
{
    TempDir d;
    RelayServer server(ephemeral());
    server.start();
    Member alice(d.path, "alice", server.port(), 1);
    alice.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected(); }));
    ASSERT_TRUE(alice.runner->settle(2000ms));
    const std::size_t before = alice.publishes();

    write_file(alice.root / "Zoo.java", "class Zoo {\n    int aField\n}\n");
    ASSERT_TRUE(eventually([&] { return alice.runner->status().rfind("held: parse error", 0) == 0; }));
    EXPECT_NE(alice.runner->status().find("Zoo.java 3:1"), std::string::npos) << alice.runner->status();
    std::this_thread::sleep_for(300ms);
    EXPECT_EQ(alice.publishes(), before);
    EXPECT_TRUE(server.snapshot().empty() || server.snapshot()[0].changes.empty());

    write_file(alice.root / "Zoo.java", "class Zoo {\n    long aField;\n    void feed(int n) { }\n}\n");
    ASSERT_TRUE(eventually([&] { return alice.publishes() == before + 1; }));
    EXPECT_EQ(alice.runner->status(), "ok");
    ASSERT_TRUE(eventually([&] { return !server.snapshot().empty() && server.snapshot()[0].changes.size() == 1; }));
    EXPECT_EQ(server.snapshot()[0].changes[0].kind, ChangeKind::FieldTypeChanged);
    alice.runner->stop();
}

TEST(Runner, SavesInsideOneDebounceWindowPublishOnce)
{
    TempDir d;
    RelayServer server(ephemeral());
    server.start();
    Member alice(d.path, "alice", server.port(), 1, true, 400);
    alice.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected(); }));
    ASSERT_TRUE(alice.runner->settle(2000ms));
    const std::size_t before = alice.publishes();

    write_file(alice.root / "Zoo.java", "class Zoo {\n    int aField;\n    void feed(int n) { n++; }\n}\n");
    std::this_thread::sleep_for(50ms);
    write_file(alice.root / "Zoo.java", "class Zoo {\n    int aField = 1;\n    void feed(int n) { n--; }\n}\n");
    ASSERT_TRUE(eventually([&] { return alice.publishes() > before; }));
    std::this_thread::sleep_for(600ms);
    EXPECT_EQ(alice.publishes(), before + 1);
    EXPECT_EQ(alice.runner->local().changes.size(), 2u);
    alice.runner->stop();
}

TEST(Runner, RevisionBumpRebases)
{
    TempDir d;
    RelayServer server(ephemeral());
    server.start();
    Member alice(d.path, "alice", server.port(), 1);
    Member bob(d.path, "bob", server.port(), 1);
    alice.runner->start();
    bob.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected() && bob.runner->connected(); }));

    const std::string edited = "class Zoo {\n    int aField;\n    void feed(int n) { n++; }\n}\n";
    write_file(alice.root / "Zoo.java", edited);
    ASSERT_TRUE(eventually([&] { return bob.report("zoo/Zoo.java/Zoo/feed").has_value(); }));

    // alice syncs: the edit is now part of her base revision.
    FileRevisionProvider::write_revision(alice.root, RevisionStamp{2});
    ASSERT_TRUE(eventually([&] { return alice.runner->base() == RevisionStamp{2}; }));
    EXPECT_TRUE(alice.runner->local().changes.empty());
    EXPECT_EQ(alice.runner->counters().rebases, 1u);
    EXPECT_EQ(read_file(alice.root / ".conflict-radar" / "baseline" / "Zoo.java"), edited);
    // bob, still on 1, now sees alice's newer, empty set: nothing to report.
    ASSERT_TRUE(eventually([&] { return !bob.report("zoo/Zoo.java/Zoo/feed").has_value(); }));

    // bob's next publish on 1 is stale.
    write_file(bob.root / "Zoo.java", "class Zoo {\n    int aField;\n    void feed(long n) { }\n}\n");
    ASSERT_TRUE(eventually([&] { return bob.runner->counters().rejected > 0; }));
    EXPECT_EQ(bob.runner->status().rfind("rejected", 0), 0u);
    std::this_thread::sleep_for(200ms);
    EXPECT_TRUE(alice.runner->reports().empty());
    alice.runner->stop();
    bob.runner->stop();
}

TEST(Runner, RevertSendsRevert)
{
    TempDir d;
    RelayServer server(ephemeral());
    server.start();
    Member alice(d.path, "alice", server.port(), 1);
    Member bob(d.path, "bob", server.port(), 1);
    alice.runner->start();
    bob.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected() && bob.runner->connected(); }));
    write_file(alice.root / "Zoo.java", "class Zoo {\n    int aField;\n    void feed(int n) { n++; }\n}\n");
    ASSERT_TRUE(eventually([&] { return bob.report("zoo/Zoo.java/Zoo/feed").has_value(); }));
    write_file(alice.root / "Zoo.java", kZoo);
    ASSERT_TRUE(eventually([&] { return !bob.report("zoo/Zoo.java/Zoo/feed").has_value(); }));
    std::lock_guard lk(alice.m);
    EXPECT_TRUE(std::any_of(alice.sent.begin(), alice.sent.end(), [](const WireMessage &w) {
        return w.type == MessageType::Revert && w.filePath == "Zoo.java";
    }));
}

TEST(Runner, ReconnectRestatesState)
{
    TempDir d;
    auto server = std::make_unique<RelayServer>(ephemeral());
    server->start();
    const std::uint16_t port = server->port();
    Member alice(d.path, "alice", port, 1);
    alice.runner->start();
    ASSERT_TRUE(eventually([&] { return alice.runner->connected(); }));
    write_file(alice.root / "Zoo.java", "class Zoo {\n    int aField;\n    void feed(int n) { n++; }\n}\n");
    ASSERT_TRUE(eventually([&] { return !server->snapshot().empty() && !server->snapshot()[0].changes.empty(); }));
    server.reset();
    ASSERT_TRUE(eventually([&] { return !alice.runner->connected(); }));
    RelayOptions again = ephemeral();
    again.port = port;
    server = std::make_unique<RelayServer>(again);
    server->start();
    ASSERT_TRUE(eventually([&] { return !server->snapshot().empty() && server->snapshot()[0].changes.size() == 1; }));
    alice.runner->stop();
}

TEST(Demo, ScriptedScenarioPasses)
{
    const DemoScript script = load_demo_script(std::string(CONFLICT_RADAR_SOURCE_DIR) + "/demos/javadoc_check.json");
    std::ostringstream out;
    const DemoResult r = run_demo(script, out);
    ASSERT_TRUE(r.ok) << r.failure << "\n" << out.str();
    ASSERT_EQ(r.latencies.size(), script.steps.size());
    for (const std::int64_t ms : r.latencies) {
        EXPECT_LE(ms, 2000);
    }
    EXPECT_NE(out.str().find("CONFLICT"), std::string::npos);
}

TEST(Demo, FailingExpectationNamesTheStep)
{
    DemoScript s = load_demo_script(std::string(CONFLICT_RADAR_SOURCE_DIR) + "/demos/javadoc_check.json");
    s.timeoutMillis = 400;
    s.steps.resize(1);
    s.steps[0].expect[0].severity = Severity::Conflict; // bob only gets Awareness
    std::ostringstream out;
    const DemoResult r = run_demo(s, out);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failure.rfind("step 1", 0), 0u) << r.failure;
}
