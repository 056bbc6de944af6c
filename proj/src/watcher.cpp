#include "conflict_radar/watcher.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <set>
#include <thread>

#include <poll.h>
#include <sys/eventfd.h>
#include <sys/inotify.h>
#include <unistd.h>

namespace conflict_radar {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> segments(std::string_view path)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t slash = path.find('/', start);
        const std::size_t end = slash == std::string_view::npos ? path.size() : slash;
        out.push_back(path.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

bool match_segment(std::string_view p, std::string_view s)
{
    std::size_t pi = 0;
    std::size_t si = 0;
    std::size_t star = std::string_view::npos;
    std::size_t mark = 0;
    while (si < s.size()) {
        if (pi < p.size() && (p[pi] == '?' || p[pi] == s[si])) {
            ++pi;
            ++si;
        } else if (pi < p.size() && p[pi] == '*') {
            star = pi++;
            mark = si;
        } else if (star != std::string_view::npos) {
            pi = star + 1;
            si = ++mark;
        } else {
            return false;
        }
    }
    while (pi < p.size() && p[pi] == '*') {
        ++pi;
    }
    return pi == p.size();
}

bool match_segments(const std::vector<std::string_view> &p, std::size_t pi,
                    const std::vector<std::string_view> &s, std::size_t si)
{
    if (pi == p.size()) {
        return si == s.size();
    }
    if (p[pi] == "**") {
        for (std::size_t k = si; k <= s.size(); ++k) {
            if (match_segments(p, pi + 1, s, k)) {
                return true;
            }
        }
        return false;
    }
    return si < s.size() && match_segment(p[pi], s[si]) && match_segments(p, pi + 1, s, si + 1);
}

bool skipped_dir(const fs::path &name)
{
    const std::string n = name.filename().string();
    return !n.empty() && n[0] == '.';
}

bool wanted(const std::vector<std::string> &patterns, const std::string &rel)
{
    return std::any_of(patterns.begin(), patterns.end(),
                       [&](const std::string &p) { return glob_match(p, rel); });
}

} // namespace

bool glob_match(std::string_view pattern, std::string_view path)
{
    return match_segments(segments(pattern), 0, segments(path), 0);
}

std::vector<std::string> scan_files(const fs::path &root, const std::vector<std::string> &patterns)
{
    std::vector<std::string> out;
    std::error_code ec;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    for (; !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (it->is_directory(ec)) {
            if (skipped_dir(it->path())) {
                it.disable_recursion_pending();
            }
            continue;
        }
        if (!it->is_regular_file(ec)) {
            continue;
        }
        const std::string rel = fs::relative(it->path(), root, ec).generic_string();
        if (!ec && wanted(patterns, rel)) {
            out.push_back(rel);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct FileWatcher::Impl {
    fs::path root;
    WatchOptions options;
    Callback callback;
    Warn warn;

    std::thread thread;
    std::atomic<bool> running{false};
    std::atomic<bool> usingPoll{false};
    int stopFd = -1;
    int inotifyFd = -1;
    std::map<int, std::string> dirs; // watch descriptor -> relative dir ("" = root)

    void say(const std::string &text) const
    {
        if (warn) {
            warn(text);
        }
    }

    bool add_tree(const fs::path &dir, std::vector<std::string> *found)
    {
        std::error_code ec;
        const std::string rel = dir == root ? std::string() : fs::relative(dir, root, ec).generic_string();
        const int wd = inotify_add_watch(inotifyFd, dir.c_str(),
                                         IN_CLOSE_WRITE | IN_MOVED_TO | IN_MOVED_FROM | IN_CREATE |
                                             IN_DELETE | IN_ONLYDIR);
        if (wd < 0) {
            return false;
        }
        dirs[wd] = rel;
        for (fs::directory_iterator it(dir, ec); !ec && it != fs::directory_iterator(); it.increment(ec)) {
            if (it->is_directory(ec)) {
                if (!skipped_dir(it->path()) && !add_tree(it->path(), found)) {
                    return false;
                }
            } else if (found != nullptr) {
                const std::string f = fs::relative(it->path(), root, ec).generic_string();
                if (wanted(options.patterns, f)) {
                    found->push_back(f);
                }
            }
        }
        return true;
    }

    bool start_inotify()
    {
        inotifyFd = inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
        if (inotifyFd < 0) {
            say(std::string("inotify unavailable (") + std::strerror(errno) + "); polling every " +
                std::to_string(options.pollInterval.count()) + " ms");
            return false;
        }
        if (!add_tree(root, nullptr)) {
            say(std::string("inotify watch failed (") + std::strerror(errno) + "); polling every " +
                std::to_string(options.pollInterval.count()) + " ms");
            close(inotifyFd);
            inotifyFd = -1;
            dirs.clear();
            return false;
        }
        return true;
    }

    void run_inotify()
    {
        alignas(inotify_event) char buf[64 * 1024];
        while (running) {
            pollfd fds[2] = {{inotifyFd, POLLIN, 0}, {stopFd, POLLIN, 0}};
            if (::poll(fds, 2, -1) < 0) {
                if (errno == EINTR) {
                    continue;
                }
                break;
            }
            if (fds[1].revents != 0) {
                break;
            }
            std::set<std::string> changed;
            for (;;) {
                const ssize_t n = read(inotifyFd, buf, sizeof buf);
                if (n <= 0) {
                    break;
                }
                for (char *p = buf; p < buf + n;) {
                    const auto *ev = reinterpret_cast<const inotify_event *>(p);
                    p += sizeof(inotify_event) + ev->len;
                    const auto dir = dirs.find(ev->wd);
                    if (dir == dirs.end() || ev->len == 0) {
                        continue;
                    }
                    const std::string name(ev->name);
                    const std::string rel = dir->second.empty() ? name : dir->second + "/" + name;
                    if ((ev->mask & IN_ISDIR) != 0) {
                        if ((ev->mask & (IN_CREATE | IN_MOVED_TO)) != 0 && name[0] != '.') {
                            std::vector<std::string> found;
                            add_tree(root / rel, &found);
                            changed.insert(found.begin(), found.end());
                        }
                        continue;
                    }
                    if ((ev->mask & IN_CREATE) != 0) {
                        continue; // content arrives with IN_CLOSE_WRITE
                    }
                    if (wanted(options.patterns, rel)) {
                        changed.insert(rel);
                    }
                }
            }
            if (!changed.empty()) {
                callback({changed.begin(), changed.end()});
            }
        }
    }

    void run_poll()
    {
        using Stamp = std::pair<fs::file_time_type, std::uintmax_t>;
        auto take = [this] {
            std::map<std::string, Stamp> out;
            for (const std::string &rel : scan_files(root, options.patterns)) {
                std::error_code ec;
                const auto t = fs::last_write_time(root / rel, ec);
                const auto size = fs::file_size(root / rel, ec);
                out[rel] = {t, size};
            }
            return out;
        };
        std::map<std::string, Stamp> seen = take();
        while (running) {
            pollfd fd = {stopFd, POLLIN, 0};
            const int r = ::poll(&fd, 1, static_cast<int>(options.pollInterval.count()));
            if (r > 0) {
                break;
            }
            std::map<std::string, Stamp> now = take();
            std::vector<std::string> changed;
            for (const auto &[rel, stamp] : now) {
                const auto it = seen.find(rel);
                if (it == seen.end() || it->second != stamp) {
                    changed.push_back(rel);
                }
            }
            for (const auto &[rel, stamp] : seen) {
                if (!now.count(rel)) {
                    changed.push_back(rel);
                }
            }
            seen = std::move(now);
            if (!changed.empty()) {
                std::sort(changed.begin(), changed.end());
                callback(changed);
            }
        }
    }
};

FileWatcher::FileWatcher(fs::path root, WatchOptions options, Callback callback, Warn warn)
    : impl_(std::make_unique<Impl>())
{
    impl_->root = std::move(root);
    impl_->options = std::move(options);
    impl_->callback = std::move(callback);
    impl_->warn = std::move(warn);
}

FileWatcher::~FileWatcher()
{
    stop();
}

void FileWatcher::start()
{
    if (impl_->running) {
        return;
    }
    impl_->stopFd = eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
    if (impl_->stopFd < 0) {
        throw std::runtime_error(std::string("eventfd: ") + std::strerror(errno));
    }
    bool inotify = false;
    if (impl_->options.backend != WatchBackend::Poll) {
        inotify = impl_->start_inotify();
        if (!inotify && impl_->options.backend == WatchBackend::Inotify) {
            throw std::runtime_error("inotify backend requested but unavailable");
        }
    }
    impl_->usingPoll = !inotify;
    impl_->running = true;
    impl_->thread = std::thread([this, inotify] {
        if (inotify) {
            impl_->run_inotify();
        } else {
            impl_->run_poll();
        }
    });
}

void FileWatcher::stop()
{
    if (!impl_->running.exchange(false)) {
        return;
    }
    const std::uint64_t one = 1;
    [[maybe_unused]] const ssize_t n = write(impl_->stopFd, &one, sizeof one);
    impl_->thread.join();
    if (impl_->inotifyFd >= 0) {
        close(impl_->inotifyFd);
        impl_->inotifyFd = -1;
    }
    close(impl_->stopFd);
    impl_->stopFd = -1;
    impl_->dirs.clear();
}

bool FileWatcher::polling() const
{
    return impl_->usingPoll;
}

} // namespace conflict_radar
