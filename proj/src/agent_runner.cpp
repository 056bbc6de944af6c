#include "conflict_radar/agent_runner.hpp"

#include "conflict_radar/codec.hpp"
#include "conflict_radar/revision.hpp"
#include "conflict_radar/watcher.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

namespace conflict_radar {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t now_millis()
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

struct FilesEvent {
    std::vector<std::string> paths;
};
struct NetEvent {
    WireMessage message;
};
struct LinkEvent {
    bool connected;
    std::string detail;
};
using Event = std::variant<FilesEvent, NetEvent, LinkEvent>;

std::string kinds_text(const std::set<ChangeKind> &kinds)
{
    std::string out;
    for (const ChangeKind k : kinds) {
        out += (out.empty() ? "" : ",") + std::string(to_string(k));
    }
    return out;
}

} // namespace

std::string describe_report(const ConflictReport &report)
{
    std::ostringstream out;
    std::string authors;
    for (const std::string &a : report.remoteAuthors) {
        authors += (authors.empty() ? "" : ",") + a;
    }
    out << (report.severity == Severity::Conflict ? "CONFLICT " : "awareness") << "  " << report.pathId
        << "  " << authors << " " << kinds_text(report.remoteKinds);
    if (!report.localKinds.empty()) {
        out << "  local " << kinds_text(report.localKinds);
    }
    if (report.decorationSpan.startLine > 0) {
        out << "  at " << report.decorationSpan.startLine << ":" << report.decorationSpan.startCol;
    }
    return out.str();
}

struct AgentRunner::Impl {
    WorkspaceConfig config;
    Log log;
    RunnerOptions options;
    std::unique_ptr<RevisionProvider> provider;
    WorkspaceAgent agent;
    RemoteView view;
    std::unique_ptr<RelayClient> client;
    std::unique_ptr<FileWatcher> watcher;
    std::thread coordinator;

    mutable std::mutex m;
    std::condition_variable cv;
    std::deque<Event> queue;
    std::set<std::string> pending;
    std::optional<Clock::time_point> deadline;
    bool busy = false;
    bool stopping = false;
    bool started = false;
    SendHook sendHook;

    // Copies for other threads, refreshed by the coordinator.
    std::vector<ConflictReport> reports;
    ChangeSet localCopy;
    RevisionStamp baseCopy;
    std::string status = "starting";
    RunnerCounters counters;
    bool linkUp = false;

    std::vector<WireMessage> outbox;

    Impl(WorkspaceConfig c, Log l, RunnerOptions o)
        : config(std::move(c)), log(std::move(l)), options(o), agent(config.project, config.author),
          view(config.author)
    {
    }

    void say(const std::string &text) const
    {
        if (log) {
            log(text);
        }
    }

    void push(Event e)
    {
        {
            std::lock_guard lk(m);
            queue.push_back(std::move(e));
        }
        cv.notify_all();
    }

    void set_status(const std::string &text)
    {
        std::lock_guard lk(m);
        status = text;
    }

    void rebase(RevisionStamp rev, bool atStart)
    {
        const std::vector<std::string> current = scan_files(config.root, config.include);
        if (atStart) {
            provider->prepare(current);
        } else {
            provider->on_revision_change(current);
        }
        std::map<std::string, std::string> baseline;
        std::set<std::string> all(current.begin(), current.end());
        for (const std::string &f : provider->baseline_files(config.include)) {
            all.insert(f);
            if (auto content = provider->baseline(f)) {
                baseline[f] = std::move(*content);
            }
        }
        agent.reset(rev, baseline);
        view.set_local_base(rev);
        {
            std::lock_guard lk(m);
            if (!atStart) {
                ++counters.rebases;
            }
            pending.insert(all.begin(), all.end());
        }
        if (!atStart) {
            say("base revision is now " + std::to_string(rev.value));
        }
        burst();
    }

    void burst()
    {
        std::set<std::string> paths;
        {
            std::lock_guard lk(m);
            paths.swap(pending);
            deadline.reset();
        }
        const RevisionStamp rev = provider->current();
        if (rev != agent.base()) {
            rebase(rev, false);
            return;
        }
        std::map<std::string, std::optional<std::string>> files;
        for (const std::string &p : paths) {
            files[p] = read_file(config.root / p);
        }
        const BurstResult result = agent.on_burst(files, now_millis());
        {
            std::lock_guard lk(m);
            ++counters.bursts;
        }
        if (result.outcome == BurstOutcome::Held) {
            std::string text = "held: parse error";
            for (const auto &[file, error] : result.errors) {
                text += " in " + file + " " + error;
            }
            {
                std::lock_guard lk(m);
                ++counters.held;
                status = text;
            }
            say(text);
            return;
        }
        for (const std::string &f : result.reverted) {
            outbox.push_back(revert(config.author, f));
            say("reverted " + f);
        }
        if (result.outcome == BurstOutcome::Published) {
            say("published " + std::to_string(result.delta->changes.size()) + " change(s)");
            outbox.push_back(publish(*result.delta));
        }
        {
            std::lock_guard lk(m);
            counters.reverts += result.reverted.size();
            if (result.outcome == BurstOutcome::Published) {
                ++counters.published;
            }
            localCopy = agent.local();
            baseCopy = agent.base();
            status = "ok";
        }
        recompute();
    }

    void on_message(const WireMessage &msg)
    {
        switch (msg.type) {
        case MessageType::Welcome:
            if (msg.sessionRevision > agent.base()) {
                say("session is at revision " + std::to_string(msg.sessionRevision.value) +
                    ", workspace at " + std::to_string(agent.base().value) + "; sync to publish");
            }
            break;
        case MessageType::Reject: {
            const std::string text = "rejected: base revision " + std::to_string(msg.baseRevision.value) +
                                     " is behind session revision " +
                                     std::to_string(msg.sessionRevision.value);
            {
                std::lock_guard lk(m);
                ++counters.rejected;
                status = text;
            }
            say(text);
            return;
        }
        case MessageType::Error:
            say("relay error: " + msg.reason);
            return;
        default:
            break;
        }
        if (view.apply(msg)) {
            recompute();
        }
    }

    void recompute()
    {
        DetectOptions opts;
        opts.suppressIdentical = config.suppressIdentical;
        opts.locator = [this](const SemanticPath &p, const std::set<ChangeKind> &k) {
            return agent.locate(p, k);
        };
        std::vector<ConflictReport> next = client_detect(agent.local(), view, opts);
        std::vector<ConflictReport> before;
        {
            std::lock_guard lk(m);
            before = reports;
        }
        const ReportDiff d = diff_reports(before, next);
        for (const ConflictReport &r : d.added) {
            say(describe_report(r));
        }
        for (const ConflictReport &r : d.changed) {
            say(describe_report(r));
        }
        for (const ConflictReport &r : d.removed) {
            say("cleared    " + r.pathId);
        }
        {
            std::lock_guard lk(m);
            reports = std::move(next);
        }
        write_reports();
    }

    void write_reports()
    {
        Json doc;
        {
            std::lock_guard lk(m);
            doc = Json{{"author", config.author},
                       {"project", config.project},
                       {"baseRevision", baseCopy.value},
                       {"connected", linkUp},
                       {"status", status},
                       {"reports", encode(reports)}};
        }
        try {
            write_file(config.root / ".conflict-radar" / "reports.json", canonical(doc) + "\n");
        } catch (const std::exception &e) {
            say(std::string("cannot write reports: ") + e.what());
        }
    }

    void flush()
    {
        std::vector<WireMessage> out;
        out.swap(outbox);
        SendHook hook;
        {
            std::lock_guard lk(m);
            hook = sendHook;
        }
        for (const WireMessage &msg : out) {
            if (hook) {
                hook(msg);
            }
            if (client) {
                client->send(msg);
            }
        }
    }

    void run()
    {
        auto nextRevisionCheck = Clock::now() + options.revisionPoll;
        std::unique_lock lk(m);
        while (!stopping) {
            Clock::time_point wake = nextRevisionCheck;
            if (deadline && *deadline < wake) {
                wake = *deadline;
            }
            cv.wait_until(lk, wake, [&] { return stopping || !queue.empty(); });
            if (stopping) {
                break;
            }
            std::vector<NetEvent> net;
            while (!queue.empty()) {
                Event e = std::move(queue.front());
                queue.pop_front();
                if (auto *f = std::get_if<FilesEvent>(&e)) {
                    pending.insert(f->paths.begin(), f->paths.end());
                    deadline = Clock::now() + std::chrono::milliseconds(config.debounceMillis);
                } else if (auto *n = std::get_if<NetEvent>(&e)) {
                    net.push_back(std::move(*n));
                } else {
                    const auto &link = std::get<LinkEvent>(e);
                    if (link.connected != linkUp) {
                        linkUp = link.connected;
                        lk.unlock();
                        say(link.connected ? "connected to " + config.server
                                           : "disconnected: " + link.detail);
                        lk.lock();
                    }
                }
            }
            busy = true;
            const bool due = deadline && Clock::now() >= *deadline;
            lk.unlock();

            try {
                for (const NetEvent &n : net) {
                    on_message(n.message);
                }
                if (due) {
                    burst();
                }
                if (Clock::now() >= nextRevisionCheck) {
                    nextRevisionCheck = Clock::now() + options.revisionPoll;
                    const RevisionStamp rev = provider->current();
                    if (rev != agent.base()) {
                        rebase(rev, false);
                    }
                }
            } catch (const std::exception &e) {
                say(std::string("error: ") + e.what());
            }
            flush();

            lk.lock();
            busy = false;
            cv.notify_all();
        }
    }
};

AgentRunner::AgentRunner(WorkspaceConfig config, Log log, RunnerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(log), options))
{
}

AgentRunner::~AgentRunner()
{
    stop();
}

void AgentRunner::set_send_hook(SendHook hook)
{
    std::lock_guard lk(impl_->m);
    impl_->sendHook = std::move(hook);
}

void AgentRunner::start()
{
    Impl &im = *impl_;
    if (im.started) {
        return;
    }
    im.config.validate();
    im.provider = make_revision_provider(im.config.revisionProvider, im.config.root,
                                         [&im](const std::string &w) { im.say("warning: " + w); });
    im.rebase(im.provider->current(), true);
    im.outbox.clear(); // the greeting carries the same state

    im.client = std::make_unique<RelayClient>(
        parse_endpoint(im.config.server),
        [&im] {
            std::lock_guard lk(im.m);
            return std::vector<WireMessage>{hello(im.config.author, im.config.project, im.baseCopy),
                                            publish(im.localCopy)};
        },
        [&im](const WireMessage &msg) { im.push(NetEvent{msg}); },
        [&im](bool up, const std::string &detail) { im.push(LinkEvent{up, detail}); },
        im.options.backoff);

    if (im.options.watch) {
        WatchOptions wo;
        wo.patterns = im.config.include;
        wo.backend = im.config.backend;
        im.watcher = std::make_unique<FileWatcher>(
            im.config.root, wo, [&im](const std::vector<std::string> &paths) { im.push(FilesEvent{paths}); },
            [&im](const std::string &w) { im.say("warning: " + w); });
        im.watcher->start();
    }
    im.started = true;
    im.coordinator = std::thread([&im] { im.run(); });
    im.client->start();
}

void AgentRunner::stop()
{
    Impl &im = *impl_;
    if (!im.started) {
        return;
    }
    im.started = false;
    if (im.watcher) {
        im.watcher->stop();
    }
    {
        std::lock_guard lk(im.m);
        im.stopping = true;
    }
    im.cv.notify_all();
    if (im.coordinator.joinable()) {
        im.coordinator.join();
    }
    if (im.client) {
        im.client->stop();
    }
}

void AgentRunner::touch(const std::vector<std::string> &paths)
{
    impl_->push(FilesEvent{paths});
}

bool AgentRunner::settle(std::chrono::milliseconds timeout)
{
    std::unique_lock lk(impl_->m);
    return impl_->cv.wait_for(lk, timeout, [&] {
        return impl_->queue.empty() && !impl_->busy && impl_->pending.empty();
    });
}

std::vector<ConflictReport> AgentRunner::reports() const
{
    std::lock_guard lk(impl_->m);
    return impl_->reports;
}

ChangeSet AgentRunner::local() const
{
    std::lock_guard lk(impl_->m);
    return impl_->localCopy;
}

RevisionStamp AgentRunner::base() const
{
    std::lock_guard lk(impl_->m);
    return impl_->baseCopy;
}

std::string AgentRunner::status() const
{
    std::lock_guard lk(impl_->m);
    return impl_->status;
}

RunnerCounters AgentRunner::counters() const
{
    std::lock_guard lk(impl_->m);
    return impl_->counters;
}

bool AgentRunner::connected() const
{
    std::lock_guard lk(impl_->m);
    return impl_->linkUp;
}

} // namespace conflict_radar
