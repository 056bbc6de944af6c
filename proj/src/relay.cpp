#include "conflict_radar/relay.hpp"

#include "conflict_radar/distill.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace conflict_radar {

// -- session -----------------------------------------------------------------

RelaySession::RelaySession(std::string sessionId) : sessionId_(std::move(sessionId)) {}

std::vector<Outgoing> RelaySession::connect(ClientId id, ClientRole role)
{
    clients_[id] = Client{role, {}};
    std::vector<Outgoing> out;
    if (role == ClientRole::Observer) {
        out.push_back({id, welcome()});
        WireMessage feed;
        feed.type = MessageType::Conflicts;
        feed.conflicts = conflicts();
        out.push_back({id, std::move(feed)});
    }
    return out;
}

std::vector<Outgoing> RelaySession::receive(ClientId from, const WireMessage &m)
{
    const auto it = clients_.find(from);
    if (it == clients_.end()) {
        return {};
    }
    switch (m.type) {
    case MessageType::Hello:
        return on_hello(from, m);
    case MessageType::Publish:
    case MessageType::Revert:
        if (it->second.author.empty()) {
            return fail(from, std::string(to_string(m.type)) + " before HELLO");
        }
        return m.type == MessageType::Publish ? on_publish(from, m.delta.value_or(ChangeSet{}))
                                              : on_revert(from, m.filePath);
    case MessageType::Bye: {
        std::vector<Outgoing> out = disconnect(from);
        WireMessage ack;
        ack.type = MessageType::Bye;
        ack.author = m.author;
        out.push_back({from, ack, true});
        return out;
    }
    default:
        return fail(from, "unexpected " + std::string(to_string(m.type)) + " from client");
    }
}

std::vector<Outgoing> RelaySession::malformed(ClientId from, const std::string &reason)
{
    return fail(from, reason);
}

std::vector<Outgoing> RelaySession::disconnect(ClientId id)
{
    const auto it = clients_.find(id);
    if (it == clients_.end()) {
        return {};
    }
    const std::string author = it->second.author;
    clients_.erase(it);
    std::vector<Outgoing> out;
    if (author.empty()) {
        return out;
    }
    for (const auto &[other, c] : clients_) {
        if (c.author == author) {
            return out; // the author reconnected on another connection
        }
    }
    stored_.erase(author);
    lastSeq_.erase(author);
    WireMessage bye;
    bye.type = MessageType::Bye;
    bye.author = author;
    fan_out(out, id, bye);
    feed(out);
    return out;
}

std::vector<ChangeSet> RelaySession::snapshot() const
{
    std::vector<ChangeSet> out;
    for (const auto &[author, set] : stored_) {
        out.push_back(set);
    }
    return out;
}

std::map<std::string, std::vector<ConflictReport>> RelaySession::conflicts() const
{
    std::vector<RenameAlias> aliases;
    for (const auto &[author, set] : stored_) {
        const auto more = rename_aliases(set);
        aliases.insert(aliases.end(), more.begin(), more.end());
    }
    std::set<std::string> members;
    for (const auto &[id, c] : clients_) {
        if (c.role == ClientRole::Member && !c.author.empty()) {
            members.insert(c.author);
        }
    }
    for (const auto &[author, set] : stored_) {
        members.insert(author);
    }
    std::map<std::string, std::vector<ConflictReport>> out;
    for (const std::string &author : members) {
        std::vector<ChangeSet> remotes;
        for (const auto &[other, otherSet] : stored_) {
            if (other != author) {
                remotes.push_back(otherSet);
            }
        }
        const auto own = stored_.find(author);
        out[author] = detect(own == stored_.end() ? ChangeSet{author, highest_, {}} : own->second, remotes, aliases);
    }
    return out;
}

std::vector<Outgoing> RelaySession::on_hello(ClientId from, const WireMessage &m)
{
    Client &client = clients_[from];
    client.role = ClientRole::Member;
    client.author = m.author;
    highest_ = std::max(highest_, m.baseRevision);
    std::vector<Outgoing> out{{from, welcome()}};
    feed(out);
    return out;
}

std::vector<Outgoing> RelaySession::on_publish(ClientId from, const ChangeSet &incoming)
{
    const std::string &author = clients_[from].author;
    ChangeSet delta = incoming;
    delta.author = author;
    for (SemanticChange &c : delta.changes) {
        c.author = author;
    }
    std::vector<Outgoing> out;
    if (version_gate(delta, highest_) == GateDecision::Rejected) {
        WireMessage reject;
        reject.type = MessageType::Reject;
        reject.author = author;
        reject.baseRevision = delta.baseRevision;
        reject.sessionRevision = highest_;
        reject.reason = "stale base revision " + std::to_string(delta.baseRevision.value) +
                        " < " + std::to_string(highest_.value);
        out.push_back({from, std::move(reject)});
        return out;
    }
    highest_ = std::max(highest_, delta.baseRevision);
    auto [pos, fresh] = stored_.try_emplace(author);
    if (fresh) {
        pos->second.author = author;
        pos->second.baseRevision = delta.baseRevision;
    }
    if (!fold_delta(pos->second, lastSeq_[author], delta) && !fresh) {
        return out;
    }
    WireMessage broadcast;
    broadcast.type = MessageType::Broadcast;
    broadcast.author = author;
    broadcast.delta = std::move(delta);
    fan_out(out, from, broadcast);
    feed(out);
    return out;
}

std::vector<Outgoing> RelaySession::on_revert(ClientId from, const std::string &filePath)
{
    const std::string &author = clients_[from].author;
    if (const auto it = stored_.find(author); it != stored_.end()) {
        it->second = purge_on_revert(it->second, filePath);
    }
    std::vector<Outgoing> out;
    fan_out(out, from, revert(author, filePath));
    feed(out);
    return out;
}

WireMessage RelaySession::welcome() const
{
    WireMessage m;
    m.type = MessageType::Welcome;
    m.sessionId = sessionId_;
    m.sessionRevision = highest_;
    m.snapshot = snapshot();
    m.lastSeqs = lastSeq_;
    return m;
}

void RelaySession::fan_out(std::vector<Outgoing> &out, ClientId except, const WireMessage &m) const
{
    for (const auto &[id, c] : clients_) {
        if (id == except) {
            continue;
        }
        // Members only see traffic once they have joined.
        if (c.role == ClientRole::Observer || !c.author.empty()) {
            out.push_back({id, m});
        }
    }
}

void RelaySession::feed(std::vector<Outgoing> &out) const
{
    bool any = false;
    for (const auto &[id, c] : clients_) {
        any = any || c.role == ClientRole::Observer;
    }
    if (!any) {
        return;
    }
    WireMessage m;
    m.type = MessageType::Conflicts;
    m.conflicts = conflicts();
    for (const auto &[id, c] : clients_) {
        if (c.role == ClientRole::Observer) {
            out.push_back({id, m});
        }
    }
}

std::vector<Outgoing> RelaySession::fail(ClientId to, const std::string &reason)
{
    WireMessage m;
    m.type = MessageType::Error;
    m.reason = reason;
    std::vector<Outgoing> out = disconnect(to);
    out.insert(out.begin(), Outgoing{to, std::move(m), true});
    return out;
}

// -- transport ---------------------------------------------------------------

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

constexpr std::size_t kMaxLine = 16u << 20;

std::string mime_type(const std::filesystem::path &p)
{
    const std::string ext = p.extension().string();
    if (ext == ".html") {
        return "text/html";
    }
    if (ext == ".js" || ext == ".mjs") {
        return "application/javascript";
    }
    if (ext == ".css") {
        return "text/css";
    }
    if (ext == ".json") {
        return "application/json";
    }
    if (ext == ".svg") {
        return "image/svg+xml";
    }
    return "application/octet-stream";
}

} // namespace

struct RelayServer::Impl {
    class Peer : public std::enable_shared_from_this<Peer> {
    public:
        virtual ~Peer() = default;
        virtual void send(std::string line, bool close) = 0;
        virtual void shut() = 0;
    };

    class TcpPeer;
    class WsPeer;
    class HttpSession;

    explicit Impl(RelayOptions o) : options(std::move(o)), session(options.sessionId) {}

    RelayOptions options;
    asio::io_context io;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    std::unique_ptr<tcp::acceptor> tcpAcceptor;
    std::unique_ptr<tcp::acceptor> httpAcceptor;
    std::uint16_t tcpPort = 0;
    std::uint16_t httpPort = 0;
    std::thread thread;

    mutable std::mutex mutex; // session and actions; taken on the I/O thread too
    RelaySession session;
    std::vector<Json> actions;
    std::map<ClientId, std::shared_ptr<Peer>> peers;
    ClientId nextId = 1;

    std::mutex stopMutex;
    std::condition_variable stopped;
    bool running = false;

    void deliver(const std::vector<Outgoing> &out)
    {
        for (const Outgoing &o : out) {
            if (const auto it = peers.find(o.to); it != peers.end()) {
                it->second->send(encode_line(o.message), o.close);
            }
        }
    }

    ClientId attach(std::shared_ptr<Peer> peer, ClientRole role)
    {
        std::vector<Outgoing> out;
        ClientId id;
        {
            std::lock_guard lock(mutex);
            id = nextId++;
            peers[id] = peer;
            out = session.connect(id, role);
        }
        deliver(out);
        return id;
    }

    void line(ClientId id, std::string_view text)
    {
        std::vector<Outgoing> out;
        {
            std::lock_guard lock(mutex);
            try {
                if (const auto m = decode_line(text)) {
                    out = session.receive(id, *m);
                }
            } catch (const ProtocolError &e) {
                out = session.malformed(id, e.what());
            }
        }
        deliver(out);
    }

    void fault(ClientId id, const std::string &reason)
    {
        std::vector<Outgoing> out;
        {
            std::lock_guard lock(mutex);
            out = session.malformed(id, reason);
        }
        deliver(out);
    }

    void detach(ClientId id)
    {
        std::vector<Outgoing> out;
        {
            std::lock_guard lock(mutex);
            if (peers.erase(id) == 0) {
                return;
            }
            out = session.disconnect(id);
        }
        deliver(out);
    }

    void accept_tcp();
    void accept_http();
};

class RelayServer::Impl::TcpPeer : public Peer {
public:
    TcpPeer(Impl &server, tcp::socket socket)
        : server_(server), socket_(std::move(socket)), buffer_(kMaxLine)
    {
    }

    void run()
    {
        id_ = server_.attach(shared_from_this(), ClientRole::Member);
        read();
    }

    void send(std::string line, bool close) override
    {
        if (closing_) {
            return;
        }
        closing_ = close;
        outbox_.push_back(std::move(line) + "\n");
        if (outbox_.size() == 1) {
            write();
        }
    }

    void shut() override
    {
        beast::error_code ec;
        socket_.shutdown(tcp::socket::shutdown_both, ec);
        socket_.close(ec);
    }

private:
    void read()
    {
        auto self = std::static_pointer_cast<TcpPeer>(shared_from_this());
        asio::async_read_until(socket_, buffer_, '\n', [self](beast::error_code ec, std::size_t n) {
            if (ec) {
                if (ec == asio::error::not_found) {
                    self->server_.fault(self->id_, "line exceeds " + std::to_string(kMaxLine) + " bytes");
                }
                self->server_.detach(self->id_);
                return;
            }
            std::string text(asio::buffers_begin(self->buffer_.data()),
                             asio::buffers_begin(self->buffer_.data()) + static_cast<std::ptrdiff_t>(n));
            self->buffer_.consume(n);
            while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
                text.pop_back();
            }
            if (!text.empty()) {
                self->server_.line(self->id_, text);
            }
            if (!self->closing_) {
                self->read();
            }
        });
    }

    void write()
    {
        auto self = std::static_pointer_cast<TcpPeer>(shared_from_this());
        asio::async_write(socket_, asio::buffer(outbox_.front()), [self](beast::error_code ec, std::size_t) {
            if (ec) {
                self->server_.detach(self->id_);
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) {
                self->write();
            } else if (self->closing_) {
                self->server_.detach(self->id_);
                self->shut();
            }
        });
    }

    Impl &server_;
    tcp::socket socket_;
    asio::streambuf buffer_;
    std::deque<std::string> outbox_;
    ClientId id_ = 0;
    bool closing_ = false;
};

class RelayServer::Impl::WsPeer : public Peer {
public:
    WsPeer(Impl &server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

    void run(http::request<http::string_body> request)
    {
        auto self = std::static_pointer_cast<WsPeer>(shared_from_this());
        ws_.read_message_max(kMaxLine);
        ws_.async_accept(request, [self](beast::error_code ec) {
            if (ec) {
                return;
            }
            self->id_ = self->server_.attach(self, ClientRole::Observer);
            self->read();
        });
    }

    void send(std::string line, bool close) override
    {
        if (closing_) {
            return;
        }
        closing_ = close;
        outbox_.push_back(std::move(line));
        if (outbox_.size() == 1) {
            write();
        }
    }

    void shut() override
    {
        beast::error_code ec;
        beast::get_lowest_layer(ws_).close(ec);
    }

private:
    void read()
    {
        auto self = std::static_pointer_cast<WsPeer>(shared_from_this());
        ws_.async_read(buffer_, [self](beast::error_code ec, std::size_t) {
            if (ec) {
                self->server_.detach(self->id_);
                return;
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->server_.line(self->id_, text);
            if (!self->closing_) {
                self->read();
            }
        });
    }

    void write()
    {
        auto self = std::static_pointer_cast<WsPeer>(shared_from_this());
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()), [self](beast::error_code ec, std::size_t) {
            if (ec) {
                self->server_.detach(self->id_);
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) {
                self->write();
            } else if (self->closing_) {
                self->server_.detach(self->id_);
                self->ws_.async_close(websocket::close_code::policy_error, [self](beast::error_code) {});
            }
        });
    }

    Impl &server_;
    websocket::stream<tcp::socket> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    ClientId id_ = 0;
    bool closing_ = false;
};

class RelayServer::Impl::HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(Impl &server, tcp::socket socket) : server_(server), socket_(std::move(socket)) {}

    void run()
    {
        parser_.emplace();
        parser_->body_limit(1u << 20);
        auto self = shared_from_this();
        http::async_read(socket_, buffer_, *parser_, [self](beast::error_code ec, std::size_t) {
            if (ec) {
                return;
            }
            self->handle(self->parser_->release());
        });
    }

private:
    using Response = http::response<http::string_body>;

    void handle(http::request<http::string_body> req)
    {
        const std::string target(req.target());
        if (websocket::is_upgrade(req)) {
            if (target == "/ws") {
                std::make_shared<WsPeer>(server_, std::move(socket_))->run(std::move(req));
                return;
            }
            reply(error(req, http::status::not_found, "no such endpoint"));
            return;
        }
        if (req.method() == http::verb::options) {
            reply(text(req, http::status::no_content, "", "text/plain"));
        } else if (target == "/actions" && req.method() == http::verb::post) {
            post_action(req);
        } else if (target == "/actions" && req.method() == http::verb::get) {
            std::lock_guard lock(server_.mutex);
            reply(text(req, http::status::ok, canonical(Json(server_.actions)), "application/json"));
        } else if (req.method() == http::verb::get) {
            static_file(req, target);
        } else {
            reply(error(req, http::status::method_not_allowed, "unsupported method"));
        }
    }

    void post_action(const http::request<http::string_body> &req)
    {
        Json doc;
        try {
            doc = Json::parse(req.body());
        } catch (const Json::parse_error &) {
            reply(error(req, http::status::bad_request, "body is not JSON"));
            return;
        }
        const bool ok = doc.is_object() && doc.contains("member") && doc["member"].is_string() &&
                        doc.contains("pathId") && doc["pathId"].is_string() && doc.contains("action") &&
                        doc["action"].is_string() && doc.contains("atMillis") &&
                        doc["atMillis"].is_number_integer();
        if (!ok) {
            reply(error(req, http::status::bad_request, "expected {member, pathId, action, atMillis}"));
            return;
        }
        {
            std::lock_guard lock(server_.mutex);
            server_.actions.push_back(std::move(doc));
        }
        reply(text(req, http::status::ok, "{\"ok\":true}", "application/json"));
    }

    void static_file(const http::request<http::string_body> &req, std::string target)
    {
        if (server_.options.dashboardDir.empty()) {
            reply(error(req, http::status::not_found, "dashboard not enabled"));
            return;
        }
        target = target.substr(0, target.find('?'));
        if (target == "/") {
            target = "/index.html";
        }
        if (target.find("..") != std::string::npos) {
            reply(error(req, http::status::bad_request, "bad path"));
            return;
        }
        const std::filesystem::path file = server_.options.dashboardDir / target.substr(1);
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            reply(error(req, http::status::not_found, "not found"));
            return;
        }
        std::ostringstream body;
        body << in.rdbuf();
        reply(text(req, http::status::ok, body.str(), mime_type(file)));
    }

    static Response text(const http::request<http::string_body> &req, http::status status,
                         std::string body, const std::string &type)
    {
        Response res{status, req.version()};
        res.set(http::field::content_type, type);
        res.set(http::field::access_control_allow_origin, "*");
        res.set(http::field::access_control_allow_headers, "content-type");
        res.keep_alive(false);
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    }

    static Response error(const http::request<http::string_body> &req, http::status status,
                          const std::string &reason)
    {
        return text(req, status, canonical(Json{{"error", reason}}), "application/json");
    }

    void reply(Response res)
    {
        auto self = shared_from_this();
        auto shared = std::make_shared<Response>(std::move(res));
        http::async_write(socket_, *shared, [self, shared](beast::error_code, std::size_t) {
            beast::error_code ec;
            self->socket_.shutdown(tcp::socket::shutdown_send, ec);
        });
    }

    Impl &server_;
    tcp::socket socket_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
};

void RelayServer::Impl::accept_tcp()
{
    tcpAcceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            return;
        }
        socket.set_option(tcp::no_delay(true));
        std::make_shared<TcpPeer>(*this, std::move(socket))->run();
        accept_tcp();
    });
}

void RelayServer::Impl::accept_http()
{
    httpAcceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            return;
        }
        std::make_shared<HttpSession>(*this, std::move(socket))->run();
        accept_http();
    });
}

RelayServer::RelayServer(RelayOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

RelayServer::~RelayServer()
{
    stop();
}

void RelayServer::start()
{
    const auto address = asio::ip::make_address(impl_->options.host);
    impl_->tcpAcceptor = std::make_unique<tcp::acceptor>(impl_->io, tcp::endpoint(address, impl_->options.port));
    if (impl_->options.http) {
        const std::uint16_t httpPort = impl_->options.port == 0 ? 0 : impl_->options.port + 1;
        impl_->httpAcceptor = std::make_unique<tcp::acceptor>(impl_->io, tcp::endpoint(address, httpPort));
        impl_->httpPort = impl_->httpAcceptor->local_endpoint().port();
        impl_->accept_http();
    }
    impl_->tcpPort = impl_->tcpAcceptor->local_endpoint().port();
    impl_->accept_tcp();
    impl_->work.emplace(impl_->io.get_executor());
    {
        std::lock_guard lock(impl_->stopMutex);
        impl_->running = true;
    }
    impl_->thread = std::thread([this] { impl_->io.run(); });
}

void RelayServer::stop()
{
    if (!impl_->thread.joinable()) {
        return;
    }
    impl_->work.reset();
    impl_->io.stop();
    impl_->thread.join();
    beast::error_code ec;
    impl_->tcpAcceptor->close(ec);
    if (impl_->httpAcceptor) {
        impl_->httpAcceptor->close(ec);
    }
    for (auto &[id, peer] : impl_->peers) {
        peer->shut();
    }
    impl_->peers.clear();
    {
        std::lock_guard lock(impl_->stopMutex);
        impl_->running = false;
    }
    impl_->stopped.notify_all();
}

void RelayServer::wait()
{
    std::unique_lock lock(impl_->stopMutex);
    impl_->stopped.wait(lock, [this] { return !impl_->running; });
}

std::uint16_t RelayServer::port() const
{
    return impl_->tcpPort;
}

std::uint16_t RelayServer::http_port() const
{
    return impl_->httpPort;
}

std::vector<Json> RelayServer::actions() const
{
    std::lock_guard lock(impl_->mutex);
    return impl_->actions;
}

std::vector<ChangeSet> RelayServer::snapshot() const
{
    std::lock_guard lock(impl_->mutex);
    return impl_->session.snapshot();
}

} // namespace conflict_radar
