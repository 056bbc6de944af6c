#include "conflict_radar/agent_runner.hpp"
#include "conflict_radar/codec.hpp"
#include "conflict_radar/config.hpp"
#include "conflict_radar/demo.hpp"
#include "conflict_radar/detect.hpp"
#include "conflict_radar/distill.hpp"
#include "conflict_radar/relay.hpp"
#include "conflict_radar/revision.hpp"
#include "conflict_radar/syntax.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <mutex>

using namespace conflict_radar;

namespace {

std::string slurp(const std::string &path)
{
    const auto text = read_file(path);
    if (!text) {
        throw std::runtime_error("cannot read " + path);
    }
    return *text;
}

std::string span_text(const Span &s)
{
    return std::to_string(s.startLine) + ":" + std::to_string(s.startCol);
}

void print_class(const ClassDecl &c, int depth)
{
    const std::string pad(depth * 2, ' ');
    std::cout << pad << c.keyword << " " << c.name << "  " << span_text(c.nameSpan) << "\n";
    for (const FieldDecl &f : c.fields) {
        std::cout << pad << "  field " << f.type << " " << f.name << "  " << span_text(f.nameSpan) << "\n";
    }
    for (const MethodDecl &m : c.methods) {
        std::cout << pad << "  method " << (m.returnType ? *m.returnType + " " : "") << m.name << "(";
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            std::cout << (i ? ", " : "") << m.params[i].type << " " << m.params[i].name;
        }
        std::cout << ")  " << span_text(m.nameSpan) << "\n";
    }
    for (const ClassDecl &inner : c.classes) {
        print_class(inner, depth + 1);
    }
}

std::string file_name_of(const std::string &path)
{
    return std::filesystem::path(path).filename().string();
}

ChangeSet load_change_set(const std::string &path)
{
    const Json doc = Json::parse(slurp(path));
    return decode_change_set(doc);
}

void print_reports(const std::vector<ConflictReport> &reports, bool json)
{
    if (json) {
        std::cout << canonical(encode(reports)) << "\n";
        return;
    }
    if (reports.empty()) {
        std::cout << "no reports\n";
    }
    for (const ConflictReport &r : reports) {
        std::cout << describe_report(r) << "\n";
    }
}

int conflict_exit(const std::vector<ConflictReport> &reports)
{
    for (const ConflictReport &r : reports) {
        if (r.severity == Severity::Conflict) {
            return 1;
        }
    }
    return 0;
}

// Blocks SIGINT/SIGTERM in every thread started afterwards; wait_for_signal
// picks them up synchronously.
sigset_t block_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

void wait_for_signal(const sigset_t &set)
{
    int sig = 0;
    sigwait(&set, &sig);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Semantic conflict radar for Java workspaces"};
    app.require_subcommand(1);

    std::string project;
    std::string root = ".";
    std::string server;
    std::string author;
    std::string provider;
    bool json = false;
    int port = 7341;

    // parse
    std::string parseFile;
    auto *parse = app.add_subcommand("parse", "Print the declarations of a Java file");
    parse->add_option("file", parseFile, "Java source")->required();
    parse->add_flag("--json", json, "Canonical JSON output");

    // diff
    std::string before;
    std::string after;
    auto *diff = app.add_subcommand("diff", "Semantic changes between two versions of a file");
    diff->add_option("before", before)->required();
    diff->add_option("after", after)->required();
    diff->add_option("--project", project, "Project name used in path ids");
    diff->add_option("--author", author);
    diff->add_flag("--json", json);

    // conflicts
    std::string localFile;
    std::vector<std::string> remoteFiles;
    bool suppressIdentical = false;
    auto *conflicts = app.add_subcommand(
        "conflicts", "Reports from change-set files, or the last reports of a running agent");
    conflicts->add_option("--local", localFile, "Local change set (JSON)");
    conflicts->add_option("--remote", remoteFiles, "Remote change sets (JSON)");
    conflicts->add_option("--root", root, "Workspace whose reports.json to show");
    conflicts->add_flag("--suppress-identical", suppressIdentical);
    conflicts->add_flag("--json", json);

    // watch
    int debounce = -1;
    bool poll = false;
    auto *watch = app.add_subcommand("watch", "Run the workspace agent");
    watch->add_option("--root", root);
    watch->add_option("--project", project);
    watch->add_option("--server", server, "host:port (default $CONFLICT_RADAR_SERVER or 127.0.0.1:7341)");
    watch->add_option("--author", author);
    watch->add_option("--revision-provider", provider, "file or git");
    watch->add_option("--debounce", debounce, "Milliseconds (default 300)");
    watch->add_flag("--poll", poll, "Poll the file system instead of inotify");

    // serve
    std::string host = "127.0.0.1";
    std::string dashboard;
    bool noHttp = false;
    auto *serve = app.add_subcommand("serve", "Run the relay server");
    serve->add_option("--port", port, "TCP port; WebSocket and HTTP on port+1")->check(CLI::Range(0, 65534));
    serve->add_option("--host", host);
    serve->add_option("--dashboard", dashboard, "Directory of static dashboard files");
    serve->add_flag("--no-http", noHttp);

    // demo
    std::string script = "demos/javadoc_check.json";
    bool verbose = false;
    auto *demo = app.add_subcommand("demo", "Replay a scripted multi-member scenario");
    demo->add_option("script", script, "Demo script (JSON)");
    demo->add_flag("-v,--verbose", verbose, "Show agent logs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*parse) {
            const ElementTree tree = parse_unit(slurp(parseFile), file_name_of(parseFile));
            if (json) {
                std::cout << canonical(encode(tree)) << "\n";
            } else {
                for (const ClassDecl &c : tree.classes) {
                    print_class(c, 0);
                }
            }
            return 0;
        }
        if (*diff) {
            const std::string file = file_name_of(after);
            const ElementTree a = parse_unit(slurp(before), file);
            const ElementTree b = parse_unit(slurp(after), file);
            ExtractOptions opts;
            opts.project = project.empty() ? "project" : project;
            opts.author = author;
            const ChangeSet changes = extract_changes(a, b, opts);
            if (json) {
                std::cout << canonical(encode(changes)) << "\n";
            } else {
                if (changes.changes.empty()) {
                    std::cout << "no semantic changes\n";
                }
                for (const SemanticChange &c : changes.changes) {
                    std::cout << to_string(c.kind) << "  " << render_path_id(c.path);
                    if (c.oldValue || c.newValue) {
                        std::cout << "  " << c.oldValue.value_or("-") << " -> " << c.newValue.value_or("-");
                    }
                    std::cout << "  at " << span_text(c.decorationSpan) << "\n";
                }
            }
            return 0;
        }
        if (*conflicts) {
            std::vector<ConflictReport> reports;
            if (!localFile.empty() || !remoteFiles.empty()) {
                const ChangeSet local = localFile.empty() ? ChangeSet{} : load_change_set(localFile);
                std::vector<ChangeSet> remotes;
                std::vector<RenameAlias> aliases = rename_aliases(local);
                for (const std::string &f : remoteFiles) {
                    remotes.push_back(load_change_set(f));
                    const auto more = rename_aliases(remotes.back());
                    aliases.insert(aliases.end(), more.begin(), more.end());
                }
                DetectOptions opts;
                opts.suppressIdentical = suppressIdentical;
                reports = detect(local, remotes, aliases, opts);
            } else {
                const std::string path = (std::filesystem::path(root) / ".conflict-radar" / "reports.json").string();
                const Json doc = Json::parse(slurp(path));
                for (const Json &r : doc.at("reports")) {
                    reports.push_back(decode_report(r));
                }
                if (!json) {
                    std::cout << "# " << doc.value("author", "") << " at revision "
                              << doc.value("baseRevision", 0) << ", " << doc.value("status", "") << "\n";
                }
            }
            print_reports(reports, json);
            return conflict_exit(reports);
        }
        if (*watch) {
            WorkspaceConfig config;
            config.root = root;
            load_workspace_config(config);
            if (!project.empty()) {
                config.project = project;
            }
            if (!server.empty()) {
                config.server = server;
            }
            if (!author.empty()) {
                config.author = author;
            }
            if (!provider.empty()) {
                config.revisionProvider = provider;
            }
            if (debounce >= 0) {
                config.debounceMillis = debounce;
            }
            if (poll) {
                config.backend = WatchBackend::Poll;
            }
            config.validate();
            const sigset_t signals = block_signals();
            std::mutex outMutex;
            AgentRunner runner(config, [&outMutex](const std::string &line) {
                std::lock_guard lk(outMutex);
                std::cout << line << std::endl;
            });
            runner.start();
            wait_for_signal(signals);
            runner.stop();
            return 0;
        }
        if (*serve) {
            RelayOptions opts;
            opts.host = host;
            opts.port = static_cast<std::uint16_t>(port);
            opts.http = !noHttp;
            opts.dashboardDir = dashboard;
            const sigset_t signals = block_signals();
            RelayServer relay(opts);
            relay.start();
            std::cout << "relay on " << host << ":" << relay.port();
            if (opts.http) {
                std::cout << ", websocket ws://" << host << ":" << relay.http_port() << "/ws";
            }
            std::cout << std::endl;
            wait_for_signal(signals);
            relay.stop();
            return 0;
        }
        if (*demo) {
            const DemoResult result = run_demo(load_demo_script(script), std::cout, verbose);
            return result.ok ? 0 : 1;
        }
    } catch (const SyntaxError &e) {
        std::cerr << "error: " << span_text(e.span()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
