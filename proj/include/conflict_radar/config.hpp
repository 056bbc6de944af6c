#pragma once

#include "conflict_radar/watcher.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace conflict_radar {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WorkspaceConfig {
    std::string project;
    std::filesystem::path root = ".";
    std::vector<std::string> include{"**/*.java"};
    std::string server = "127.0.0.1:7341";
    std::string author;
    int debounceMillis = 300;
    std::string revisionProvider = "file";
    bool suppressIdentical = false;
    WatchBackend backend = WatchBackend::Auto;

    // Throws ConfigError naming the first bad field.
    void validate() const;
};

// `key = value` lines; '#' starts a comment; values may be double-quoted.
std::map<std::string, std::string> parse_key_values(const std::string &text);

// Applies keys from <root>/.conflict-radar/config.toml (if present), then
// CONFLICT_RADAR_SERVER for the server when the file did not set one.
// Unknown keys are errors.
void load_workspace_config(WorkspaceConfig &config);
void apply_key_values(WorkspaceConfig &config, const std::map<std::string, std::string> &values);

std::string default_server();

} // namespace conflict_radar
