#pragma once

#include "conflict_radar/codec.hpp"
#include "conflict_radar/model.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace conflict_radar {

struct DemoExpect {
    std::string member;
    std::string pathId;
    // nullopt: `member` must have no report for the path.
    std::optional<Severity> severity;
};

struct DemoStep {
    std::string member;
    int delayMillis = 0;
    std::string filePath;
    // nullopt deletes the file.
    std::optional<std::string> newContent;
    std::vector<DemoExpect> expect;
    bool expectRejected = false;
    std::string note;
};

struct DemoMember {
    std::string name;
    std::uint64_t revision = 1;
};

struct DemoScript {
    std::string project = "demo";
    std::map<std::string, std::string> files; // initial content, every member
    std::vector<DemoMember> members;
    std::vector<DemoStep> steps;
    int debounceMillis = 50;
    // Per step, from the write until every expectation holds.
    int timeoutMillis = 2000;
};

DemoScript parse_demo_script(const Json &doc);
DemoScript load_demo_script(const std::string &path);

struct DemoResult {
    bool ok = false;
    std::string failure; // names the step
    std::vector<std::int64_t> latencies; // per step, millis
};

// Runs a relay and one agent per member over temporary directories, replays
// the steps and checks expectations, printing a timeline to `out`.
DemoResult run_demo(const DemoScript &script, std::ostream &out, bool verbose = false);

} // namespace conflict_radar
