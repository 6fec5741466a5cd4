#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "leakscope/runtime.hpp"
#include "leakscope/types.hpp"

namespace testutil {

inline std::filesystem::path fixture_dir() { return LEAKSCOPE_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline int count_status(const std::vector<leakscope::Task>& tasks, leakscope::TaskStatus status) {
    int n = 0;
    for (const auto& t : tasks)
        if (t.status == status)
            n++;
    return n;
}

inline int count_not_done(const std::vector<leakscope::Task>& tasks) {
    int n = 0;
    for (const auto& t : tasks)
        if (t.status != leakscope::TaskStatus::Done)
            n++;
    return n;
}

inline const leakscope::Task* task_with_status(const std::vector<leakscope::Task>& tasks,
                                               leakscope::TaskStatus status) {
    for (const auto& t : tasks)
        if (t.status == status)
            return &t;
    return nullptr;
}

// First trace event whose rendered line contains every needle.
inline const leakscope::TraceEvent* find_event(const std::vector<leakscope::TraceEvent>& trace,
                                               const std::vector<std::string>& needles) {
    for (const auto& e : trace) {
        std::string line = e.str();
        bool all = true;
        for (const auto& n : needles)
            if (line.find(n) == std::string::npos) {
                all = false;
                break;
            }
        if (all)
            return &e;
    }
    return nullptr;
}

// Scratch directory unique per test name, cleaned before use.
inline std::filesystem::path scratch_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / ("leakscope-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testutil
