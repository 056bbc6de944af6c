#pragma once

#include "conflict_radar/model.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace conflict_radar {

using Warn = std::function<void(const std::string &)>;

// Where the base revision and the files' content at that revision come from.
class RevisionProvider {
public:
    virtual ~RevisionProvider() = default;

    virtual RevisionStamp current() = 0;
    // File content at the current revision; nullopt when the file did not
    // exist or cannot be read.
    virtual std::optional<std::string> baseline(const std::string &relPath) = 0;
    // Files present at the current revision that match `patterns`.
    virtual std::vector<std::string> baseline_files(const std::vector<std::string> &patterns) = 0;
    virtual std::string name() const = 0;
    // Called at agent start-up with the files currently in the workspace.
    virtual void prepare(const std::vector<std::string> &currentFiles) { (void)currentFiles; }
    // Called once the agent has seen the revision move.
    virtual void on_revision_change(const std::vector<std::string> &currentFiles) { (void)currentFiles; }
};

// Reads an integer from <root>/.conflict-radar/REVISION; baseline content is
// kept under <root>/.conflict-radar/baseline/.
class FileRevisionProvider : public RevisionProvider {
public:
    explicit FileRevisionProvider(std::filesystem::path root, Warn warn = {});

    RevisionStamp current() override;
    std::optional<std::string> baseline(const std::string &relPath) override;
    std::vector<std::string> baseline_files(const std::vector<std::string> &patterns) override;
    std::string name() const override { return "file"; }

    // Without a baseline directory, the current files become the baseline.
    void prepare(const std::vector<std::string> &currentFiles) override;
    // A new revision means the workspace was synced: its current files
    // become the baseline.
    void on_revision_change(const std::vector<std::string> &currentFiles) override;

    static void write_revision(const std::filesystem::path &root, RevisionStamp stamp);

private:
    std::filesystem::path root_;
    Warn warn_;
};

// First-parent commit count of HEAD; baseline content via `git show`.
class GitRevisionProvider : public RevisionProvider {
public:
    explicit GitRevisionProvider(std::filesystem::path root, Warn warn = {});

    RevisionStamp current() override;
    std::optional<std::string> baseline(const std::string &relPath) override;
    std::vector<std::string> baseline_files(const std::vector<std::string> &patterns) override;
    std::string name() const override { return "git"; }

private:
    std::filesystem::path root_;
    Warn warn_;
};

std::unique_ptr<RevisionProvider> make_revision_provider(const std::string &kind,
                                                         const std::filesystem::path &root,
                                                         Warn warn = {});

// True iff the file now byte-equals its content at the base revision. An
// unreadable baseline counts as not reverted.
bool detect_revert(RevisionProvider &provider, const std::filesystem::path &root,
                   const std::string &relPath, const Warn &warn = {});

std::optional<std::string> read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &content);

// Runs a command, capturing stdout. Returns nullopt on non-zero exit.
std::optional<std::string> run_capture(const std::string &command);
std::string shell_quote(const std::string &text);

} // namespace conflict_radar
