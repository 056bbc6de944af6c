#include "conflict_radar/client.hpp"

#include "conflict_radar/distill.hpp"

#include <boost/asio.hpp>

#include <condition_variable>
#include <mutex>
#include <thread>

namespace conflict_radar {

bool RemoteView::apply(const WireMessage &m)
{
    switch (m.type) {
    case MessageType::Welcome: {
        std::map<std::string, ChangeSet> next;
        for (const ChangeSet &s : m.snapshot) {
            if (s.author != self_) {
                next[s.author] = s;
            }
        }
        lastSeq_.clear();
        for (const auto &[author, seq] : m.lastSeqs) {
            if (author != self_) {
                lastSeq_[author] = seq;
            }
        }
        const bool changed = next != sets_;
        sets_ = std::move(next);
        return changed;
    }
    case MessageType::Broadcast: {
        if (!m.delta || m.author == self_) {
            return false;
        }
        if (version_gate(*m.delta, localBase_) == GateDecision::Rejected) {
            ++droppedStale_;
            return false;
        }
        auto [pos, fresh] = sets_.try_emplace(m.author);
        if (fresh) {
            pos->second.author = m.author;
            pos->second.baseRevision = m.delta->baseRevision;
        }
        return fold_delta(pos->second, lastSeq_[m.author], *m.delta) || fresh;
    }
    case MessageType::Revert: {
        const auto it = sets_.find(m.author);
        if (it == sets_.end()) {
            return false;
        }
        ChangeSet purged = purge_on_revert(it->second, m.filePath);
        const bool changed = purged != it->second;
        it->second = std::move(purged);
        return changed;
    }
    case MessageType::Bye:
        lastSeq_.erase(m.author);
        return sets_.erase(m.author) > 0;
    default:
        return false;
    }
}

void RemoteView::set_local_base(RevisionStamp base)
{
    localBase_ = base;
    for (auto it = sets_.begin(); it != sets_.end();) {
        if (version_gate(it->second, base) == GateDecision::Rejected) {
            lastSeq_.erase(it->first);
            it = sets_.erase(it);
        } else {
            ++it;
        }
    }
}

std::vector<ChangeSet> RemoteView::remotes() const
{
    std::vector<ChangeSet> out;
    for (const auto &[author, set] : sets_) {
        out.push_back(set);
    }
    return out;
}

std::vector<RenameAlias> RemoteView::aliases(const ChangeSet &local) const
{
    std::vector<RenameAlias> out = rename_aliases(local);
    for (const auto &[author, set] : sets_) {
        const auto more = rename_aliases(set);
        out.insert(out.end(), more.begin(), more.end());
    }
    return out;
}

std::vector<ConflictReport> client_detect(const ChangeSet &local, const RemoteView &view,
                                          const DetectOptions &options)
{
    return detect(local, view.remotes(), view.aliases(local), options);
}

ReportDiff diff_reports(const std::vector<ConflictReport> &before,
                        const std::vector<ConflictReport> &after)
{
    std::map<SemanticPath, const ConflictReport *> old;
    for (const ConflictReport &r : before) {
        old[r.path] = &r;
    }
    ReportDiff d;
    for (const ConflictReport &r : after) {
        const auto it = old.find(r.path);
        if (it == old.end()) {
            d.added.push_back(r);
            continue;
        }
        if (!(*it->second == r)) {
            d.changed.push_back(r);
        }
        old.erase(it);
    }
    for (const auto &[path, r] : old) {
        d.removed.push_back(*r);
    }
    return d;
}

Endpoint parse_endpoint(const std::string &text)
{
    Endpoint e;
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        if (!text.empty()) {
            e.host = text;
        }
        return e;
    }
    if (colon > 0) {
        e.host = text.substr(0, colon);
    }
    const std::string port = text.substr(colon + 1);
    if (!port.empty()) {
        const unsigned long value = std::stoul(port);
        if (value == 0 || value > 65535) {
            throw std::invalid_argument("port out of range: " + port);
        }
        e.port = static_cast<std::uint16_t>(value);
    }
    return e;
}

std::chrono::milliseconds Backoff::delay(int attempt) const
{
    std::chrono::milliseconds d = base;
    for (int i = 0; i < attempt && d < cap; ++i) {
        d *= 2;
    }
    return std::min(d, cap);
}

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct RelayClient::Impl {
    Endpoint endpoint;
    Greeting greeting;
    Handler handler;
    StatusHandler status;
    Backoff backoff;

    asio::io_context io;
    std::mutex mutex; // socket, flags
    std::condition_variable wake;
    std::unique_ptr<tcp::socket> socket;
    bool running = false;
    std::atomic<bool> isConnected{false};
    std::thread thread;

    void report(bool up, const std::string &detail)
    {
        isConnected = up;
        if (status) {
            status(up, detail);
        }
    }

    bool write_line(tcp::socket &s, const WireMessage &m)
    {
        const std::string line = encode_line(m) + "\n";
        boost::system::error_code ec;
        asio::write(s, asio::buffer(line), ec);
        return !ec;
    }

    void loop()
    {
        int attempt = 0;
        for (;;) {
            {
                std::lock_guard lock(mutex);
                if (!running) {
                    return;
                }
            }
            std::string failure;
            if (session(failure)) {
                attempt = 0;
            }
            std::unique_lock lock(mutex);
            if (!running) {
                return;
            }
            report(false, failure);
            wake.wait_for(lock, backoff.delay(attempt++), [this] { return !running; });
        }
    }

    // One connection's lifetime. Returns true if the connection was made.
    bool session(std::string &failure)
    {
        auto s = std::make_unique<tcp::socket>(io);
        boost::system::error_code ec;
        tcp::resolver resolver(io);
        const auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port), ec);
        if (!ec) {
            asio::connect(*s, results, ec);
        }
        if (ec) {
            failure = ec.message();
            return false;
        }
        s->set_option(tcp::no_delay(true), ec);
        tcp::socket *raw = nullptr;
        {
            std::lock_guard lock(mutex);
            if (!running) {
                return true;
            }
            for (const WireMessage &m : greeting()) {
                if (!write_line(*s, m)) {
                    failure = "write failed";
                    return true;
                }
            }
            socket = std::move(s);
            raw = socket.get();
            report(true, endpoint.host + ":" + std::to_string(endpoint.port));
        }
        asio::streambuf buffer;
        for (;;) {
            const std::size_t n = asio::read_until(*raw, buffer, '\n', ec);
            if (ec) {
                failure = ec == asio::error::eof ? "server closed the connection" : ec.message();
                break;
            }
            std::string line(asio::buffers_begin(buffer.data()),
                             asio::buffers_begin(buffer.data()) + static_cast<std::ptrdiff_t>(n) - 1);
            buffer.consume(n);
            try {
                if (const auto m = decode_line(line)) {
                    handler(*m);
                }
            } catch (const ProtocolError &e) {
                failure = std::string("bad message from server: ") + e.what();
                break;
            }
        }
        std::lock_guard lock(mutex);
        socket->close(ec);
        socket.reset();
        return true;
    }
};

RelayClient::RelayClient(Endpoint endpoint, Greeting greeting, Handler handler, StatusHandler status,
                         Backoff backoff)
    : impl_(std::make_unique<Impl>())
{
    impl_->endpoint = std::move(endpoint);
    impl_->greeting = std::move(greeting);
    impl_->handler = std::move(handler);
    impl_->status = std::move(status);
    impl_->backoff = backoff;
}

RelayClient::~RelayClient()
{
    stop();
}

void RelayClient::start()
{
    std::lock_guard lock(impl_->mutex);
    if (impl_->running) {
        return;
    }
    impl_->running = true;
    impl_->thread = std::thread([this] { impl_->loop(); });
}

void RelayClient::stop()
{
    {
        std::lock_guard lock(impl_->mutex);
        if (!impl_->running) {
            return;
        }
        impl_->running = false;
        if (impl_->socket) {
            WireMessage bye;
            bye.type = MessageType::Bye;
            impl_->write_line(*impl_->socket, bye);
            boost::system::error_code ec;
            impl_->socket->shutdown(tcp::socket::shutdown_both, ec);
        }
    }
    impl_->wake.notify_all();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
    impl_->isConnected = false;
}

bool RelayClient::send(const WireMessage &message)
{
    std::lock_guard lock(impl_->mutex);
    return impl_->socket && impl_->write_line(*impl_->socket, message);
}

bool RelayClient::connected() const
{
    return impl_->isConnected;
}

} // namespace conflict_radar
