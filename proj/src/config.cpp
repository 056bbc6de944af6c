#include "conflict_radar/config.hpp"

#include "conflict_radar/revision.hpp"

#include <cstdlib>
#include <sstream>

namespace conflict_radar {

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &value)
{
    std::vector<std::string> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

} // namespace

void WorkspaceConfig::validate() const
{
    if (author.empty()) {
        throw ConfigError("author must not be empty (--author or author = ... in config)");
    }
    if (debounceMillis < 0) {
        throw ConfigError("debounce must be >= 0");
    }
    if (include.empty()) {
        throw ConfigError("include needs at least one glob");
    }
    if (revisionProvider != "file" && revisionProvider != "git") {
        throw ConfigError("revision provider must be file or git, not '" + revisionProvider + "'");
    }
    if (!std::filesystem::is_directory(root)) {
        throw ConfigError("root " + root.string() + " is not a directory");
    }
}

std::map<std::string, std::string> parse_key_values(const std::string &text)
{
    std::map<std::string, std::string> out;
    std::stringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string body = line;
        bool quoted = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '"') {
                quoted = !quoted;
            } else if (body[i] == '#' && !quoted) {
                body.resize(i);
                break;
            }
        }
        body = trim(body);
        if (body.empty() || body.front() == '[') {
            continue; // blank, comment, or a TOML table header
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(number) + ": empty key");
        }
        out[key] = value;
    }
    return out;
}

void apply_key_values(WorkspaceConfig &config, const std::map<std::string, std::string> &values)
{
    for (const auto &[key, value] : values) {
        if (key == "project") {
            config.project = value;
        } else if (key == "author") {
            config.author = value;
        } else if (key == "server") {
            config.server = value;
        } else if (key == "include") {
            config.include = split_list(value);
        } else if (key == "debounce_ms" || key == "debounceMillis") {
            try {
                config.debounceMillis = std::stoi(value);
            } catch (const std::exception &) {
                throw ConfigError("debounce_ms: not an integer: " + value);
            }
        } else if (key == "revision_provider" || key == "revisionProvider") {
            config.revisionProvider = value;
        } else if (key == "suppress_identical") {
            config.suppressIdentical = value == "true" || value == "1";
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

std::string default_server()
{
    const char *env = std::getenv("CONFLICT_RADAR_SERVER");
    return env != nullptr && *env != '\0' ? std::string(env) : std::string("127.0.0.1:7341");
}

void load_workspace_config(WorkspaceConfig &config)
{
    config.server = default_server();
    if (const auto text = read_file(config.root / ".conflict-radar" / "config.toml")) {
        apply_key_values(config, parse_key_values(*text));
    }
    if (config.project.empty()) {
        config.project = std::filesystem::absolute(config.root).lexically_normal().filename().string();
        if (config.project.empty()) {
            config.project = std::filesystem::absolute(config.root).lexically_normal().parent_path().filename().string();
        }
    }
}

} // namespace conflict_radar
