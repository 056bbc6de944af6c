#include "conflict_radar/revision.hpp"

#include "conflict_radar/watcher.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace conflict_radar {

namespace {

const char *const kMetaDir = ".conflict-radar";

void say(const Warn &warn, const std::string &text)
{
    if (warn) {
        warn(text);
    }
}

} // namespace

std::optional<std::string> read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    // Write then rename, so watchers never see a half-written file.
    const std::filesystem::path tmp = path.string() + ".tmp~";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string shell_quote(const std::string &text)
{
    std::string out = "'";
    for (const char c : text) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::optional<std::string> run_capture(const std::string &command)
{
    FILE *pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) {
        return std::nullopt;
    }
    std::string out;
    std::array<char, 4096> chunk{};
    std::size_t n;
    while ((n = std::fread(chunk.data(), 1, chunk.size(), pipe)) > 0) {
        out.append(chunk.data(), n);
    }
    const int status = pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return std::nullopt;
    }
    return out;
}

FileRevisionProvider::FileRevisionProvider(std::filesystem::path root, Warn warn)
    : root_(std::move(root)), warn_(std::move(warn))
{
}

RevisionStamp FileRevisionProvider::current()
{
    const auto text = read_file(root_ / kMetaDir / "REVISION");
    if (!text) {
        say(warn_, "no " + std::string(kMetaDir) + "/REVISION; using revision 0");
        return RevisionStamp{0};
    }
    try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(*text, &used);
        if (text->find_first_not_of(" \t\r\n", used) != std::string::npos || text->find('-') != std::string::npos) {
            throw std::invalid_argument("trailing text");
        }
        return RevisionStamp{value};
    } catch (const std::exception &) {
        say(warn_, "unreadable " + std::string(kMetaDir) + "/REVISION; using revision 0");
        return RevisionStamp{0};
    }
}

std::optional<std::string> FileRevisionProvider::baseline(const std::string &relPath)
{
    return read_file(root_ / kMetaDir / "baseline" / relPath);
}

std::vector<std::string> FileRevisionProvider::baseline_files(const std::vector<std::string> &patterns)
{
    const std::filesystem::path dir = root_ / kMetaDir / "baseline";
    if (!std::filesystem::is_directory(dir)) {
        return {};
    }
    return scan_files(dir, patterns);
}

void FileRevisionProvider::prepare(const std::vector<std::string> &currentFiles)
{
    if (!std::filesystem::exists(root_ / kMetaDir / "baseline")) {
        on_revision_change(currentFiles);
    }
}

void FileRevisionProvider::on_revision_change(const std::vector<std::string> &currentFiles)
{
    const std::filesystem::path dir = root_ / kMetaDir / "baseline";
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    std::filesystem::create_directories(dir);
    for (const std::string &rel : currentFiles) {
        if (const auto content = read_file(root_ / rel)) {
            write_file(dir / rel, *content);
        }
    }
}

void FileRevisionProvider::write_revision(const std::filesystem::path &root, RevisionStamp stamp)
{
    write_file(root / kMetaDir / "REVISION", std::to_string(stamp.value) + "\n");
}

GitRevisionProvider::GitRevisionProvider(std::filesystem::path root, Warn warn)
    : root_(std::move(root)), warn_(std::move(warn))
{
}

RevisionStamp GitRevisionProvider::current()
{
    const auto out = run_capture("git -C " + shell_quote(root_.string()) +
                                 " rev-list --first-parent --count HEAD 2>/dev/null");
    if (!out) {
        say(warn_, root_.string() + " is not a git repository with commits; using revision 0");
        return RevisionStamp{0};
    }
    return RevisionStamp{std::stoull(*out)};
}

std::optional<std::string> GitRevisionProvider::baseline(const std::string &relPath)
{
    return run_capture("git -C " + shell_quote(root_.string()) + " show " +
                       shell_quote("HEAD:" + relPath) + " 2>/dev/null");
}

std::vector<std::string> GitRevisionProvider::baseline_files(const std::vector<std::string> &patterns)
{
    const auto out = run_capture("git -C " + shell_quote(root_.string()) +
                                 " ls-tree -r --name-only HEAD 2>/dev/null");
    std::vector<std::string> files;
    if (!out) {
        return files;
    }
    std::istringstream in(*out);
    std::string line;
    while (std::getline(in, line)) {
        for (const std::string &p : patterns) {
            if (glob_match(p, line)) {
                files.push_back(line);
                break;
            }
        }
    }
    return files;
}

std::unique_ptr<RevisionProvider> make_revision_provider(const std::string &kind,
                                                         const std::filesystem::path &root, Warn warn)
{
    if (kind == "file") {
        return std::make_unique<FileRevisionProvider>(root, std::move(warn));
    }
    if (kind == "git") {
        return std::make_unique<GitRevisionProvider>(root, std::move(warn));
    }
    throw std::invalid_argument("unknown revision provider '" + kind + "' (expected file or git)");
}

bool detect_revert(RevisionProvider &provider, const std::filesystem::path &root,
                   const std::string &relPath, const Warn &warn)
{
    const auto base = provider.baseline(relPath);
    if (!base) {
        say(warn, "no baseline for " + relPath);
        return false;
    }
    const auto now = read_file(root / relPath);
    return now && *now == *base;
}

} // namespace conflict_radar
