#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace conflict_radar {

// Glob over '/'-separated relative paths: '*' and '?' stay within one
// segment, '**' spans any number of segments.
bool glob_match(std::string_view pattern, std::string_view path);

// Relative paths under `root` matching any pattern, sorted. Skips the
// .conflict-radar directory and dot-directories.
std::vector<std::string> scan_files(const std::filesystem::path &root,
                                    const std::vector<std::string> &patterns);

enum class WatchBackend { Auto, Inotify, Poll };

struct WatchOptions {
    std::vector<std::string> patterns{"**/*.java"};
    WatchBackend backend = WatchBackend::Auto;
    std::chrono::milliseconds pollInterval{1000};
};

// Reports relative paths of files that were written, created or deleted.
// Callbacks run on the watcher's own thread.
class FileWatcher {
public:
    using Callback = std::function<void(const std::vector<std::string> &paths)>;
    using Warn = std::function<void(const std::string &)>;

    FileWatcher(std::filesystem::path root, WatchOptions options, Callback callback, Warn warn = {});
    ~FileWatcher();
    FileWatcher(const FileWatcher &) = delete;
    FileWatcher &operator=(const FileWatcher &) = delete;

    void start();
    void stop();
    // True when running on the polling fallback.
    bool polling() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace conflict_radar
